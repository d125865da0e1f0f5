#include "lissnas/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lissnas/csv.hpp"
#include "lissnas/error.hpp"
#include "lissnas/random.hpp"

namespace lissnas {

namespace {

// Resource model coefficients: affine in summed op-code magnitudes.
constexpr double kFlopsBase = 100e6;
constexpr double kFlopsPerUnit = 20e6;
constexpr double kParamsBase = 1.0e6;
constexpr double kParamsPerUnit = 0.15e6;

double hashed_normal(const CanonicalKey& key, std::uint64_t seed) {
  const std::uint64_t h = mix64(fnv1a64(key.value) ^ mix64(seed ^ 0x5bd1e995ULL));
  const std::uint64_t g = mix64(h);
  // 53-bit uniforms in (0, 1]
  const double u1 = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(g >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> normals(Rng& rng, std::size_t n, double sd) {
  std::normal_distribution<double> dist(0.0, sd);
  std::vector<double> out(n);
  for (auto& x : out) x = dist(rng);
  return out;
}

// Removes row and column means so the table carries no main effect.
void double_center(std::vector<std::vector<double>>& t) {
  const auto rows = t.size(), cols = t.front().size();
  std::vector<double> rm(rows, 0.0), cm(cols, 0.0);
  double all = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      rm[i] += t[i][j] / static_cast<double>(cols);
      cm[j] += t[i][j] / static_cast<double>(rows);
      all += t[i][j] / static_cast<double>(rows * cols);
    }
  }
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) t[i][j] += all - rm[i] - cm[j];
}

void center(std::vector<double>& xs) {
  if (xs.empty()) return;
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  for (double& x : xs) x -= m;
}

SyntheticModel build_model(const SpaceSpec& spec, Rng& rng) {
  SyntheticModel model;
  model.mean = kSyntheticMean;
  model.flops_base = kFlopsBase;
  model.flops_per_unit = kFlopsPerUnit;
  model.params_base = kParamsBase;
  model.params_per_unit = kParamsPerUnit;

  if (spec.is_block()) {
    const auto& choices = spec.block_dims().choices;
    const double layers = static_cast<double>(choices.size());
    const double unary_sd = kSyntheticUnaryScale / std::sqrt(layers);
    const double pair_sd = kSyntheticPairScale / std::sqrt(std::max(1.0, layers - 1.0));
    for (int c : choices) {
      auto w = normals(rng, static_cast<std::size_t>(c), unary_sd);
      center(w);
      model.unary.push_back(std::move(w));
    }
    for (std::size_t l = 0; l + 1 < choices.size(); ++l) {
      std::vector<std::vector<double>> table;
      for (int a = 0; a < choices[l]; ++a) table.push_back(normals(rng, static_cast<std::size_t>(choices[l + 1]), pair_sd));
      double_center(table);
      model.pairwise.push_back(std::move(table));
    }
    return model;
  }

  const auto& d = spec.cell_dims();
  const auto vocab = static_cast<std::size_t>(spec.vocabulary_size());
  const double nodes = std::max(1, d.max_nodes - 2);
  const double edges = d.max_edges;
  auto w = normals(rng, vocab, kSyntheticUnaryScale / std::sqrt(nodes));
  model.unary.push_back(std::move(w));
  std::vector<std::vector<double>> pair;
  for (std::size_t a = 0; a < vocab; ++a) pair.push_back(normals(rng, vocab, kSyntheticUnaryScale / std::sqrt(edges)));
  model.pairwise.push_back(std::move(pair));
  model.triples = normals(rng, vocab * vocab * vocab, kSyntheticPairScale / std::sqrt(edges));
  return model;
}

struct Evaluation {
  double signal = 0.0;
  double units = 0.0;
};

Evaluation evaluate_block(const SyntheticModel& m, const BlockArchitecture& b, double strength) {
  Evaluation e{m.mean, 0.0};
  for (std::size_t l = 0; l < b.choices.size(); ++l) {
    const auto c = b.choices[l].value;
    e.signal += m.unary[l][c];
    e.units += c;
    if (l + 1 < b.choices.size()) e.signal += strength * m.pairwise[l][c][b.choices[l + 1].value];
  }
  return e;
}

Evaluation evaluate_cell(const SyntheticModel& m, const SpaceSpec& spec, const CellArchitecture& raw,
                         double strength) {
  const auto pruned = prune(raw);
  if (!pruned) throw Error(ErrorKind::SpecViolation, "cell without an input->output path");
  const auto& c = *pruned;
  const auto vocab = static_cast<std::size_t>(spec.vocabulary_size());
  const auto& inner = spec.intermediate_ops();
  const int n = c.num_nodes();

  Evaluation e{m.mean, 0.0};
  for (int i = 1; i + 1 < n; ++i) {
    const auto op = c.op(i);
    e.signal += m.unary[0][op.value];
    const auto rank = std::lower_bound(inner.begin(), inner.end(), op) - inner.begin();
    e.units += static_cast<double>(rank + 1);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!c.has_edge(i, j)) continue;
      const auto a = c.op(i).value;
      const auto b = c.op(j).value;
      e.signal += m.pairwise[0][a][b];
      e.units += 1.0;
      for (int k = j + 1; k < n; ++k) {
        if (c.has_edge(j, k)) e.signal += strength * m.triples[(a * vocab + b) * vocab + c.op(k).value];
      }
    }
  }
  return e;
}

}  // namespace

BenchmarkOracle::BenchmarkOracle(Kind kind, SpaceSpec spec)
    : kind_(kind), spec_(std::move(spec)), queries_(std::make_unique<std::atomic<std::uint64_t>>(0)) {}

BenchmarkOracle::BenchmarkOracle(const BenchmarkOracle& other)
    : kind_(other.kind_),
      spec_(other.spec_),
      params_(other.params_),
      model_(other.model_),
      table_(other.table_),
      queries_(std::make_unique<std::atomic<std::uint64_t>>(other.queries_->load())) {}

BenchmarkOracle BenchmarkOracle::tabular(SpaceSpec spec, std::vector<std::pair<Architecture, BenchmarkRecord>> rows) {
  if (rows.empty()) throw Error(ErrorKind::EmptyBenchmark, "benchmark table has no records");
  BenchmarkOracle oracle(Kind::tabular, std::move(spec));
  for (auto& [arch, rec] : rows) {
    validate(arch, oracle.spec_);
    rec.key = canonical_key(arch);
    const std::string key = rec.key.value;
    auto it = oracle.table_.find(key);
    if (it == oracle.table_.end()) {
      oracle.table_.emplace(key, std::make_pair(std::move(arch), std::move(rec)));
    } else if (rec.accuracy > it->second.second.accuracy) {
      it->second = {std::move(arch), std::move(rec)};
    }
  }
  return oracle;
}

BenchmarkOracle BenchmarkOracle::synthetic(SpaceSpec spec, const SyntheticParams& params) {
  if (!(params.locality_strength >= 0.0 && params.locality_strength <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "locality_strength must lie in [0, 1]");
  }
  if (!(params.noise_sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise_sigma must be >= 0");
  BenchmarkOracle oracle(Kind::synthetic, std::move(spec));
  oracle.params_ = params;
  Rng rng(derive_seed(params.seed, 0x5ea7));
  oracle.model_ = build_model(oracle.spec_, rng);
  return oracle;
}

BenchmarkRecord BenchmarkOracle::evaluate(const Architecture& arch, const CanonicalKey& key) const {
  if (kind_ == Kind::tabular) {
    auto it = table_.find(key.value);
    if (it == table_.end()) throw Error(ErrorKind::MissingKey, "architecture " + to_text(arch) + " not in table");
    return it->second.second;
  }
  const Evaluation e = std::holds_alternative<BlockArchitecture>(arch)
                           ? evaluate_block(model_, std::get<BlockArchitecture>(arch), params_.locality_strength)
                           : evaluate_cell(model_, spec_, std::get<CellArchitecture>(arch), params_.locality_strength);
  const double noise = params_.noise_sigma > 0.0 ? params_.noise_sigma * hashed_normal(key, params_.seed) : 0.0;
  BenchmarkRecord rec;
  rec.key = key;
  rec.accuracy = std::clamp(e.signal + noise, 0.0, 1.0);
  rec.flops = model_.flops_base + model_.flops_per_unit * e.units;
  rec.params = model_.params_base + model_.params_per_unit * e.units;
  return rec;
}

BenchmarkRecord BenchmarkOracle::query(const Architecture& arch, const CanonicalKey& key) const {
  queries_->fetch_add(1, std::memory_order_relaxed);
  return evaluate(arch, key);
}

BenchmarkRecord BenchmarkOracle::query(const Architecture& arch) const {
  if (kind_ == Kind::synthetic) validate(arch, spec_);
  return query(arch, canonical_key(arch));
}

bool BenchmarkOracle::contains(const CanonicalKey& key) const {
  return kind_ == Kind::synthetic || table_.count(key.value) > 0;
}

std::vector<std::pair<Architecture, BenchmarkRecord>> BenchmarkOracle::table_rows() const {
  std::vector<std::pair<Architecture, BenchmarkRecord>> rows;
  rows.reserve(table_.size());
  for (const auto& [key, row] : table_) rows.push_back(row);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second.key < b.second.key; });
  return rows;
}

double synthetic_signal(const BenchmarkOracle& oracle, const Architecture& arch) {
  if (oracle.kind() != BenchmarkOracle::Kind::synthetic) {
    throw Error(ErrorKind::InvalidArgument, "synthetic_signal needs a synthetic oracle");
  }
  const double s = oracle.synthetic_params().locality_strength;
  const auto e = std::holds_alternative<BlockArchitecture>(arch)
                     ? evaluate_block(oracle.synthetic_model(), std::get<BlockArchitecture>(arch), s)
                     : evaluate_cell(oracle.synthetic_model(), oracle.spec(), std::get<CellArchitecture>(arch), s);
  return e.signal;
}

BenchmarkOracle load_table(const std::string& path, const SpaceSpec& spec) {
  const auto table = csv::read_file(path);
  if (table.header.empty() && table.rows.empty()) throw Error(ErrorKind::EmptyBenchmark, path + " is empty");
  if (table.header != csv::Row{"architecture_text", "accuracy", "flops", "params"}) {
    throw Error(ErrorKind::ParseError, path + " line 1: expected header architecture_text,accuracy,flops,params");
  }
  if (table.rows.empty()) throw Error(ErrorKind::EmptyBenchmark, path + " has no records");

  std::vector<std::pair<Architecture, BenchmarkRecord>> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.line_numbers[r];
    Architecture arch = [&]() -> Architecture {
      try {
        return parse_architecture(row[0], spec);
      } catch (const Error& e) {
        throw Error(ErrorKind::ParseError, path + " line " + std::to_string(line) + ": " + e.what());
      }
    }();
    if (auto* cell = std::get_if<CellArchitecture>(&arch)) {
      auto pruned = prune(*cell);
      if (!pruned) {
        throw Error(ErrorKind::SpecViolation, path + " line " + std::to_string(line) + ": no input->output path");
      }
      arch = *std::move(pruned);
    }
    try {
      validate(arch, spec);
    } catch (const Error& e) {
      throw Error(ErrorKind::SpecViolation, path + " line " + std::to_string(line) + ": " + e.what());
    }
    BenchmarkRecord rec;
    rec.accuracy = csv::parse_double(row[1], line);
    rec.flops = csv::parse_double(row[2], line);
    rec.params = csv::parse_double(row[3], line);
    if (!(rec.accuracy >= 0.0 && rec.accuracy <= 1.0)) {
      throw Error(ErrorKind::ParseError, path + " line " + std::to_string(line) + ": accuracy outside [0, 1]");
    }
    if (!(rec.flops >= 0.0) || !(rec.params >= 0.0)) {
      throw Error(ErrorKind::ParseError, path + " line " + std::to_string(line) + ": negative resource count");
    }
    rows.emplace_back(std::move(arch), std::move(rec));
  }
  return BenchmarkOracle::tabular(spec, std::move(rows));
}

namespace {

void append_row(std::string& out, const Architecture& arch, const BenchmarkRecord& rec) {
  out += csv::quote(to_text(arch));
  out += ',';
  out += csv::format_double(rec.accuracy);
  out += ',';
  out += csv::format_double(rec.flops);
  out += ',';
  out += csv::format_double(rec.params);
  out += '\n';
}

}  // namespace

std::string table_to_csv(const BenchmarkOracle& oracle) {
  std::string out = "architecture_text,accuracy,flops,params\n";
  for (const auto& [arch, rec] : oracle.table_rows()) append_row(out, arch, rec);
  return out;
}

void save_table(const BenchmarkOracle& oracle, const std::string& path) {
  csv::write_file(path, table_to_csv(oracle));
}

std::string records_to_csv(const std::vector<Architecture>& archs, const BenchmarkOracle& oracle) {
  std::string out = "architecture_text,accuracy,flops,params\n";
  for (const auto& arch : archs) append_row(out, arch, oracle.query(arch));
  return out;
}

}  // namespace lissnas
