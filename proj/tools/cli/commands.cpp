#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "lissnas/csv.hpp"
#include "lissnas/error.hpp"
#include "lissnas/metrics.hpp"
#include "lissnas/parallel.hpp"
#include "lissnas/predictor.hpp"
#include "lissnas/shrinkage.hpp"
#include "lissnas/spaces.hpp"
#include "CLI11.hpp"
#include "svg.hpp"

namespace lissnas::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kMissStormFraction = 0.01;
const char* kCardinalityCaveat =
    "reduction factor divides the raw encoding count, which counts isomorphic cells separately; "
    "reduction_factor_deduplicated uses the isomorphism-free count";

// Output files are staged in memory and written only after the command succeeded.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

  void commit(std::ostream& out) const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::InvalidArgument, "cannot create output directory '" + dir_ + "': " + ec.message());
    for (const auto& [name, content] : files_) {
      const auto path = (fs::path(dir_) / name).string();
      csv::write_file(path, content);
      out << "wrote " << path << "\n";
    }
  }

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed) throw Error(ErrorKind::ParseError, "a master seed is required (--seed or config \"seed\")");
  return *cfg.seed;
}

Rng stream(std::uint64_t seed, const char* name) { return Rng(derive_seed(seed, fnv1a64(name))); }

BenchmarkOracle make_oracle(const RunConfig& cfg, const SpaceSpec& spec) {
  if (cfg.benchmark) return load_table(*cfg.benchmark, spec);
  return BenchmarkOracle::synthetic(spec, cfg.synthetic);
}

std::string fmt(double v) { return csv::format_double(v); }

// Oracle passthrough that scores unknown architectures as 0 and counts them.
class CountingLookup final : public Predictor {
 public:
  explicit CountingLookup(const BenchmarkOracle& oracle) : oracle_(oracle) {}

  double predict(const Architecture& arch) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    try {
      return oracle_.query(arch).accuracy;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MissingKey) throw;
      misses_.fetch_add(1, std::memory_order_relaxed);
      return 0.0;
    }
  }
  std::string kind() const override { return "oracle_lookup"; }

  std::uint64_t calls() const { return calls_.load(); }
  std::uint64_t misses() const { return misses_.load(); }

 private:
  const BenchmarkOracle& oracle_;
  mutable std::atomic<std::uint64_t> calls_{0}, misses_{0};
};

std::vector<std::pair<Architecture, double>> training_pairs(const RunConfig& cfg, const SpaceSpec& spec,
                                                           const BenchmarkOracle& oracle, std::uint64_t seed) {
  Rng rng = stream(seed, "train");
  std::vector<std::pair<Architecture, double>> pairs;
  if (oracle.kind() == BenchmarkOracle::Kind::tabular) {
    auto rows = oracle.table_rows();
    std::shuffle(rows.begin(), rows.end(), rng);
    if (rows.size() > cfg.train_size) rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(cfg.train_size), rows.end());
    for (auto& [arch, rec] : rows) pairs.emplace_back(std::move(arch), rec.accuracy);
    return pairs;
  }
  const auto archs = sample_uniform(spec, cfg.train_size, rng);
  const auto acc = true_accuracies(archs, oracle);
  for (std::size_t i = 0; i < archs.size(); ++i) pairs.emplace_back(archs[i], acc[i]);
  return pairs;
}

struct PredictorSetup {
  std::shared_ptr<const Predictor> predictor;
  std::shared_ptr<const CountingLookup> lookup;  // set for oracle_lookup
  std::optional<std::string> saved_json;         // fitted ridge model
  std::vector<std::pair<Architecture, double>> train;
};

PredictorSetup make_predictor(const RunConfig& cfg, const SpaceSpec& spec, const BenchmarkOracle& oracle,
                              std::uint64_t seed) {
  PredictorSetup s;
  if (cfg.predictor == "oracle_lookup") {
    s.lookup = std::make_shared<CountingLookup>(oracle);
    s.predictor = s.lookup;
  } else if (cfg.predictor == "ridge") {
    if (cfg.train_size == 0) throw Error(ErrorKind::InvalidArgument, "train_size must be >= 1");
    s.train = training_pairs(cfg, spec, oracle, seed);
    auto model = std::make_shared<RidgePredictor>(fit_ridge(s.train, spec, cfg.lambda));
    s.saved_json = model->to_json();
    s.predictor = std::move(model);
  } else if (cfg.predictor == "file") {
    if (!cfg.predictor_path) throw Error(ErrorKind::InvalidArgument, "predictor kind 'file' needs --predictor-file");
    auto model = std::make_shared<RidgePredictor>(load_predictor(*cfg.predictor_path));
    if (!(model->spec() == spec)) throw Error(ErrorKind::SpaceMismatch, "predictor was fitted on a different space");
    s.predictor = std::move(model);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown predictor '" + cfg.predictor + "'");
  }
  return s;
}

// Accuracies for the architectures the oracle knows; unknown ones are skipped.
std::vector<double> known_accuracies(const std::vector<Architecture>& archs, const BenchmarkOracle& oracle) {
  if (oracle.kind() == BenchmarkOracle::Kind::synthetic) return true_accuracies(archs, oracle);
  std::vector<double> out;
  for (const auto& a : archs) {
    const auto key = canonical_key(a);
    if (oracle.contains(key)) out.push_back(oracle.query(a, key).accuracy);
  }
  return out;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nan("");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double max_of(const std::vector<double>& xs) {
  return xs.empty() ? std::nan("") : *std::max_element(xs.begin(), xs.end());
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

SpaceSnapshot predicted_snapshot(const std::vector<Architecture>& archs, const Predictor& predictor) {
  std::vector<double> preds(archs.size());
  parallel_for(archs.size(), [&](std::size_t i) { preds[i] = predictor.predict(archs[i]); });
  return snapshot_from(archs, preds);
}

void check_miss_storm(const PredictorSetup& p, std::ostream& err) {
  if (!p.lookup || p.lookup->misses() == 0) return;
  const double frac = static_cast<double>(p.lookup->misses()) / static_cast<double>(p.lookup->calls());
  if (frac > kMissStormFraction) {
    throw Error(ErrorKind::MissingKey, std::to_string(p.lookup->misses()) + " of " +
                                           std::to_string(p.lookup->calls()) +
                                           " predictor queries missed the benchmark table");
  }
  err << "warning: " << p.lookup->misses() << " architectures missing from the benchmark were scored 0\n";
}

std::vector<Architecture> enumerate_cells(const SpaceSpec& spec) {
  const auto& d = spec.cell_dims();
  const auto& inner = spec.intermediate_ops();
  const int n = d.max_nodes;
  std::vector<std::pair<int, int>> slots;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) slots.emplace_back(i, j);
  std::uint64_t labels = 1;
  for (int i = 0; i < n - 2; ++i) labels *= inner.size();

  std::map<std::string, Architecture> unique;
  for (std::uint64_t mask = 0; mask < (1ULL << slots.size()); ++mask) {
    if (__builtin_popcountll(mask) > d.max_edges) continue;
    std::uint64_t bits = 0;
    for (std::size_t s = 0; s < slots.size(); ++s)
      if ((mask >> s) & 1U) bits |= 1ULL << CellArchitecture::bit(slots[s].first, slots[s].second);
    for (std::uint64_t l = 0; l < labels; ++l) {
      std::vector<OpCode> ops(static_cast<std::size_t>(n));
      ops.front() = d.input_op;
      ops.back() = d.output_op;
      std::uint64_t rest = l;
      for (int i = 1; i + 1 < n; ++i) {
        ops[static_cast<std::size_t>(i)] = inner[rest % inner.size()];
        rest /= inner.size();
      }
      auto pruned = prune(CellArchitecture(n, bits, std::move(ops)));
      if (!pruned || !is_valid(*pruned, spec)) continue;
      Architecture a = *std::move(pruned);
      unique.emplace(canonical_key(a).value, std::move(a));
    }
  }
  std::vector<Architecture> out;
  out.reserve(unique.size());
  for (auto& [key, arch] : unique) out.push_back(std::move(arch));
  return out;
}

std::vector<Architecture> dedup(const std::vector<Architecture>& archs) {
  std::map<std::string, Architecture> unique;
  for (const auto& a : archs) unique.emplace(canonical_key(a).value, a);
  std::vector<Architecture> out;
  for (auto& [k, a] : unique) out.push_back(std::move(a));
  return out;
}

std::string stem_name(const std::string& path) { return fs::path(path).stem().string(); }

}  // namespace

// --- gen-synthetic -------------------------------------------------------------

int cmd_gen_synthetic(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = require_seed(cfg);
  const auto spec = resolve_space(cfg.space);
  const auto oracle = BenchmarkOracle::synthetic(spec, cfg.synthetic);
  const auto card = raw_cardinality(spec, kDefaultDedupSamples, seed);

  std::vector<Architecture> archs;
  bool enumerated = false;
  if (card.raw <= static_cast<long double>(cfg.enumeration_limit)) {
    archs = spec.is_block() ? enumerate_block_space(spec) : enumerate_cells(spec);
    enumerated = true;
  } else {
    if (cfg.samples == 0) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
    err << "warning: raw cardinality " << static_cast<double>(card.raw) << " exceeds "
        << cfg.enumeration_limit << "; writing " << cfg.samples << " uniform samples instead of the full space\n";
    Rng rng = stream(seed, "gen");
    archs = dedup(sample_uniform(spec, cfg.samples, rng));
  }

  Outputs files(cfg.out);
  files.add("spec.json", spec_to_json(spec));
  files.add("benchmark.csv", records_to_csv(archs, oracle));
  json replay;
  replay["seed"] = seed;
  replay["space"] = (fs::path(cfg.out) / "spec.json").string();
  replay["oracle"]["synthetic"] = {{"locality_strength", cfg.synthetic.locality_strength},
                                   {"noise_sigma", cfg.synthetic.noise_sigma},
                                   {"seed", cfg.synthetic.seed}};
  files.add("oracle.json", replay.dump(2) + "\n");
  files.commit(out);
  out << (enumerated ? "enumerated " : "sampled ") << archs.size() << " architectures\n";
  return kOk;
}

// --- shrink -----------------------------------------------------------------------

int cmd_shrink(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = require_seed(cfg);
  const auto spec = resolve_space(cfg.space);
  const auto oracle = make_oracle(cfg, spec);
  if (cfg.variant != "lissnas" && cfg.variant != "no-locality" && cfg.variant != "naive-topx") {
    throw Error(ErrorKind::InvalidArgument, "unknown variant '" + cfg.variant + "'");
  }
  if (!(cfg.good_quantile >= 0.0 && cfg.good_quantile <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "good_quantile must lie in [0, 1]");
  }
  if (cfg.shrink_n < 0 || cfg.shrink_k < 0 || cfg.shrink_k > cfg.shrink_n) {
    throw Error(ErrorKind::InvalidArgument, "shrink index needs 0 <= k <= n");
  }
  cfg.shrink.validate();
  auto setup = make_predictor(cfg, spec, oracle, seed);

  RefitHook refit;
  if (cfg.refit_each_iteration && cfg.predictor == "ridge") {
    refit = [&](const SpaceSnapshot& snap) -> std::shared_ptr<const Predictor> {
      auto pairs = setup.train;
      for (const auto& m : snap.members()) {
        if (oracle.contains(m.key)) pairs.emplace_back(m.arch, oracle.query(m.arch, m.key).accuracy);
      }
      return std::make_shared<RidgePredictor>(fit_ridge(pairs, spec, cfg.lambda));
    };
  }

  Outputs files(cfg.out);
  SpaceSnapshot snapshot;
  std::vector<Architecture> initial;
  std::optional<ShrinkTrace> trace;
  std::uint64_t queries = 0;

  if (cfg.variant == "naive-topx") {
    std::size_t budget = 0;
    if (cfg.sample_budget) {
      budget = *cfg.sample_budget;
    } else {
      // fair comparison: spend what LISSNAS would spend with the same seed
      Rng probe = stream(seed, "shrink");
      budget = lissnas(spec, *setup.predictor, cfg.shrink, probe, refit).trace.total_queries;
    }
    if (budget == 0) throw Error(ErrorKind::InvalidArgument, "sample_budget must be >= 1");
    Rng rng = stream(seed, "naive");
    snapshot = naive_topx(spec, *setup.predictor, budget, cfg.x, rng);
    Rng ref = stream(seed, "reference");
    initial = sample_uniform(spec, cfg.shrink.initial_sample_size, ref);
    queries = budget;
  } else {
    Rng rng = stream(seed, "shrink");
    auto res = cfg.variant == "lissnas" ? lissnas(spec, *setup.predictor, cfg.shrink, rng, refit)
                                        : refill_without_locality(spec, *setup.predictor, cfg.shrink, rng, refit);
    snapshot = std::move(res.snapshot);
    initial = std::move(res.initial_sample);
    trace = std::move(res.trace);
    queries = trace->total_queries;
  }
  check_miss_storm(setup, err);

  const auto init_acc = known_accuracies(initial, oracle);
  const auto shrunk_acc = known_accuracies(snapshot.architectures(), oracle);
  if (init_acc.empty() || shrunk_acc.empty()) {
    throw Error(ErrorKind::MissingKey, "no ground-truth accuracies available for the summary");
  }
  const double threshold = quantile(init_acc, cfg.good_quantile);
  const double p_init = fraction_at_least(init_acc, threshold);
  const double p_shrunk = fraction_at_least(shrunk_acc, threshold);
  const auto card = raw_cardinality(spec, kDefaultDedupSamples, seed);
  const double size = static_cast<double>(snapshot.size());

  json summary;
  summary["variant"] = cfg.variant;
  summary["seed"] = seed;
  summary["space"] = json::parse(spec_to_json(spec));
  summary["oracle"] = cfg.benchmark ? "tabular" : "synthetic";
  summary["predictor"] = setup.predictor->kind();
  summary["snapshot_size"] = snapshot.size();
  summary["raw_cardinality"] = static_cast<double>(card.raw);
  summary["deduplicated_cardinality"] = static_cast<double>(card.deduplicated);
  summary["deduplicated_exact"] = card.deduplicated_exact;
  summary["reduction_factor"] = static_cast<double>(card.raw) / size;
  summary["reduction_factor_deduplicated"] = static_cast<double>(card.deduplicated) / size;
  summary["cardinality_caveat"] = kCardinalityCaveat;
  summary["initial_sample_size"] = initial.size();
  summary["initial_mean_accuracy"] = number(mean_of(init_acc));
  summary["initial_max_accuracy"] = number(max_of(init_acc));
  summary["mean_accuracy"] = number(mean_of(shrunk_acc));
  summary["max_accuracy"] = number(max_of(shrunk_acc));
  summary["mean_pred_acc"] = snapshot.mean_pred_acc();
  summary["threshold_acc"] = threshold;
  summary["p_init"] = p_init;
  summary["p_shrunk"] = p_shrunk;
  summary["shrink_index"] = p_shrunk - p_init;
  summary["n"] = cfg.shrink_n;
  summary["k"] = cfg.shrink_k;
  summary["prob_at_least_k_init"] = prob_at_least_k(cfg.shrink_n, cfg.shrink_k, p_init);
  summary["prob_at_least_k_shrunk"] = prob_at_least_k(cfg.shrink_n, cfg.shrink_k, p_shrunk);
  summary["queries"] = queries;
  if (trace) {
    summary["iterations_retained"] = trace->iterations.size();
    summary["iterations_run"] = trace->iterations_run;
    summary["stop_reason"] = to_string(trace->stop_reason);
  } else {
    summary["x"] = cfg.x;
  }
  if (setup.lookup) summary["oracle_misses"] = setup.lookup->misses();

  files.add("snapshot.csv", snapshot_to_csv(snapshot));
  files.add("initial_sample.csv", snapshot_to_csv(predicted_snapshot(initial, *setup.predictor)));
  if (trace) files.add("trace.csv", trace_to_csv(*trace));
  if (setup.saved_json) files.add("predictor.json", *setup.saved_json);
  files.add("summary.json", summary.dump(2) + "\n");
  if (cfg.plots && trace && !trace->iterations.empty()) {
    Series s{"mean predicted accuracy", {}, {}, false};
    s.x.push_back(0);
    s.y.push_back(trace->initial_mean_pred_acc);
    for (const auto& r : trace->iterations) {
      s.x.push_back(r.iteration);
      s.y.push_back(r.mean_pred_acc);
    }
    files.add("trace.svg", svg_plot("Shrinkage trace", "iteration", "mean predicted accuracy", {s}));
  }
  files.commit(out);
  out << "snapshot size " << snapshot.size() << ", reduction factor " << summary["reduction_factor"].get<double>()
      << ", shrink index " << p_shrunk - p_init << "\n";
  return kOk;
}

// --- analyze-locality ------------------------------------------------------------

int cmd_analyze_locality(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const std::uint64_t seed = require_seed(cfg);
  const auto spec = resolve_space(cfg.space);
  const auto oracle = make_oracle(cfg, spec);
  const int total = total_edit_distance(spec);
  const int max_lag = cfg.max_lag.value_or(std::min(total, cfg.walk_length - 1));

  Rng walk_rng = stream(seed, "rwa");
  const auto curve = rwa(spec, oracle, cfg.walk_length, cfg.walks, max_lag, walk_rng);

  std::vector<ChangeFilter> filters{ChangeFilter::both};
  if (spec.is_cell()) {
    filters.push_back(ChangeFilter::operation);
    filters.push_back(ChangeFilter::edge);
  }
  const int max_d = (total + 2) / 3 + 2;
  std::string aad_csv = "change_type,distance,aad\n";
  std::vector<Series> aad_series;
  for (auto f : filters) {
    Series s{to_string(f), {}, {}, false};
    for (int d = 1; d <= max_d; ++d) {
      Rng rng = Rng(derive_seed(derive_seed(seed, fnv1a64("aad")), static_cast<std::uint64_t>(d)));
      const double v = aad(spec, oracle, d, cfg.pairs, rng, f);
      aad_csv += to_string(f) + "," + std::to_string(d) + "," + fmt(v) + "\n";
      s.x.push_back(d);
      s.y.push_back(v);
    }
    aad_series.push_back(std::move(s));
  }

  std::string rwa_csv = "lag,autocorrelation\n";
  for (std::size_t i = 0; i < curve.lags.size(); ++i) {
    rwa_csv += std::to_string(curve.lags[i]) + "," + fmt(curve.autocorrelation[i]) + "\n";
  }

  Outputs files(cfg.out);
  files.add("rwa.csv", rwa_csv);
  files.add("aad.csv", aad_csv);
  if (cfg.plots) {
    Series s{"RWA", {}, curve.autocorrelation, false};
    for (int l : curve.lags) s.x.push_back(l);
    files.add("rwa.svg", svg_plot("Random walk autocorrelation", "lag", "autocorrelation", {s}));
    files.add("aad.svg", svg_plot("Averaged absolute accuracy difference", "edit distance", "AAD", aad_series));
  }
  files.commit(out);
  const int third = (total + 2) / 3;
  if (third <= max_lag) out << "RWA at lag " << third << ": " << curve.autocorrelation[third] << "\n";
  return kOk;
}

// --- compare ------------------------------------------------------------------------

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const std::uint64_t seed = require_seed(cfg);
  if (cfg.inputs.size() < 2) throw Error(ErrorKind::InvalidArgument, "compare needs at least 2 snapshots");
  const auto spec = resolve_space(cfg.space);
  const auto oracle = make_oracle(cfg, spec);
  if (cfg.bins < 1) throw Error(ErrorKind::InvalidArgument, "bins must be >= 1");

  struct Entry {
    std::string name;
    std::vector<Architecture> archs;
    std::vector<double> acc;
  };
  std::vector<Entry> entries;
  std::map<std::string, int> stems;
  for (const auto& p : cfg.inputs) stems[stem_name(p)]++;
  for (const auto& p : cfg.inputs) {
    Entry e;
    e.name = stems[stem_name(p)] > 1 ? p : stem_name(p);
    e.archs = load_snapshot(p, spec).architectures();
    e.acc = true_accuracies(e.archs, oracle);
    entries.push_back(std::move(e));
  }

  std::string edf_csv = "snapshot,error,cumulative\n";
  std::string summary_csv =
      "snapshot,size,auc,mean_accuracy,max_accuracy,max_cosine_distance,cosine_evaluated,cosine_subsampled\n";
  std::vector<Edf> edfs;
  std::vector<Series> edf_series;
  for (const auto& e : entries) {
    Edf edf(e.acc);
    Series s{e.name, {0.0}, {0.0}, true};
    for (std::size_t j = 0; j < edf.jumps().size(); ++j) {
      edf_csv += csv::quote(e.name) + "," + fmt(edf.jumps()[j]) + "," + fmt(edf.cumulative()[j]) + "\n";
      s.x.push_back(edf.jumps()[j]);
      s.y.push_back(edf.cumulative()[j]);
    }
    s.x.push_back(1.0);
    s.y.push_back(1.0);
    edf_series.push_back(std::move(s));
    const auto cos = max_cosine_distance(e.archs, spec, seed);
    summary_csv += csv::quote(e.name) + "," + std::to_string(e.archs.size()) + "," + fmt(edf.auc()) + "," +
                   fmt(mean_of(e.acc)) + "," + fmt(max_of(e.acc)) + "," + fmt(cos.value) + "," +
                   std::to_string(cos.evaluated) + "," + (cos.subsampled ? "true" : "false") + "\n";
    edfs.push_back(std::move(edf));
  }

  std::string ks_csv = "a,b,statistic,p_value\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      const auto r = ks_two_sample(edfs[i], edfs[j]);
      ks_csv += csv::quote(entries[i].name) + "," + csv::quote(entries[j].name) + "," + fmt(r.statistic) + "," +
                fmt(r.p_value) + "\n";
    }
  }

  // shared bin edges over every compared snapshot
  std::string hist_csv = "snapshot,axis,bin,lower,upper,count\n";
  for (auto axis : {ResourceAxis::flops, ResourceAxis::params}) {
    std::vector<double> all;
    std::vector<std::vector<double>> values;
    for (const auto& e : entries) {
      values.push_back(resource_values(e.archs, oracle, axis));
      all.insert(all.end(), values.back().begin(), values.back().end());
    }
    const auto edges = histogram_edges(all, cfg.bins);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto h = histogram(values[i], edges);
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        hist_csv += csv::quote(entries[i].name) + "," + to_string(axis) + "," + std::to_string(b) + "," +
                    fmt(edges[b]) + "," + fmt(edges[b + 1]) + "," + std::to_string(h.counts[b]) + "\n";
      }
    }
  }

  Outputs files(cfg.out);
  files.add("edf.csv", edf_csv);
  files.add("compare_summary.csv", summary_csv);
  files.add("ks.csv", ks_csv);
  files.add("histogram.csv", hist_csv);
  if (cfg.plots) files.add("edf.svg", svg_plot("Error EDF", "error", "cumulative fraction", edf_series));
  files.commit(out);
  return kOk;
}

// --- report ------------------------------------------------------------------------

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.inputs.empty()) throw Error(ErrorKind::InvalidArgument, "report needs at least one run directory");
  auto pct = [](const json& v) {
    if (v.is_null()) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v.get<double>());
    return std::string(buf);
  };
  auto num = [](const json& v, const char* f) {
    if (v.is_null()) return std::string("n/a");
    char buf[48];
    std::snprintf(buf, sizeof buf, f, v.get<double>());
    return std::string(buf);
  };

  std::string md = "| run | variant | size | reduction factor | mean acc | max acc | initial mean acc | s_i | queries |\n"
                   "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& in : cfg.inputs) {
    const fs::path p = fs::is_directory(in) ? fs::path(in) / "summary.json" : fs::path(in);
    std::ifstream f(p);
    if (!f) throw Error(ErrorKind::ParseError, "cannot open '" + p.string() + "'");
    json s;
    try {
      f >> s;
      md += "| " + in + " | " + s.at("variant").get<std::string>() + " | " +
            std::to_string(s.at("snapshot_size").get<std::size_t>()) + " | " +
            num(s.at("reduction_factor"), "%.4g") + " | " + pct(s.at("mean_accuracy")) + " | " +
            pct(s.at("max_accuracy")) + " | " + pct(s.at("initial_mean_accuracy")) + " | " +
            num(s.at("shrink_index"), "%.3f") + " | " + std::to_string(s.at("queries").get<std::uint64_t>()) + " |\n";
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, p.string() + ": " + e.what());
    }
  }
  md += "\nAccuracies in percent. Reduction factor is relative to the raw encoding count.\n";
  Outputs files(cfg.out);
  files.add("report.md", md);
  out << md;
  files.commit(out);
  return kOk;
}

}  // namespace lissnas::cli

// --- entry point -------------------------------------------------------------------

namespace lissnas::cli {

namespace {

// Flag values are held here and copied into the config only when given, so
// that command-line flags override --config without clobbering it.
class Overrides {
 public:
  template <typename T, typename Field>
  CLI::Option* add(CLI::App* app, const std::string& name, Field RunConfig::*field, const std::string& help) {
    auto value = std::make_shared<T>();
    auto* opt = app->add_option(name, *value, help);
    apply_.push_back([opt, value, field](RunConfig& cfg) {
      if (opt->count() > 0) cfg.*field = *value;
    });
    return opt;
  }

  template <typename T, typename Setter>
  CLI::Option* add_with(CLI::App* app, const std::string& name, Setter set, const std::string& help) {
    auto value = std::make_shared<T>();
    auto* opt = app->add_option(name, *value, help);
    apply_.push_back([opt, value, set](RunConfig& cfg) {
      if (opt->count() > 0) set(cfg, *value);
    });
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& name, bool RunConfig::*field, const std::string& help) {
    auto* opt = app->add_flag(name, help);
    apply_.push_back([opt, field](RunConfig& cfg) {
      if (opt->count() > 0) cfg.*field = true;
    });
    return opt;
  }

  void apply(RunConfig& cfg) const {
    for (const auto& f : apply_) f(cfg);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> apply_;
};

void add_oracle_options(Overrides& o, CLI::App* app) {
  o.add<std::string>(app, "--benchmark", &RunConfig::benchmark, "benchmark table CSV (default: synthetic oracle)");
  o.add_with<double>(app, "--locality-strength", [](RunConfig& c, double v) { c.synthetic.locality_strength = v; },
                     "synthetic pairwise interaction strength");
  o.add_with<double>(app, "--noise-sigma", [](RunConfig& c, double v) { c.synthetic.noise_sigma = v; },
                     "synthetic noise standard deviation");
  o.add_with<std::uint64_t>(app, "--synthetic-seed", [](RunConfig& c, std::uint64_t v) { c.synthetic.seed = v; },
                            "seed of the synthetic oracle");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Locality-based search space shrinkage for neural architecture search", "lissnas"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lissnas 0.1.0");

  Overrides o;
  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  o.add<std::uint64_t>(&app, "--seed", &RunConfig::seed, "master seed");
  o.add<std::string>(&app, "--out", &RunConfig::out, "output directory");
  o.add<unsigned>(&app, "--threads", &RunConfig::threads, "worker threads (0: all cores)");
  o.flag(&app, "--plots", &RunConfig::plots, "also write SVG plots");
  o.add<std::string>(&app, "--space", &RunConfig::space, "preset name or spec JSON");

  auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic benchmark table");
  add_oracle_options(o, gen);
  o.add<std::size_t>(gen, "--samples", &RunConfig::samples, "sample count when the space is too large to enumerate");
  o.add<double>(gen, "--enumeration-limit", &RunConfig::enumeration_limit, "largest raw cardinality to enumerate");

  auto* shrink = app.add_subcommand("shrink", "shrink a search space");
  add_oracle_options(o, shrink);
  o.add<std::string>(shrink, "--variant", &RunConfig::variant, "lissnas | no-locality | naive-topx")
      ->check(CLI::IsMember({"lissnas", "no-locality", "naive-topx"}));
  o.add<std::string>(shrink, "--predictor", &RunConfig::predictor, "ridge | oracle_lookup | file")
      ->check(CLI::IsMember({"ridge", "oracle_lookup", "file"}));
  o.add<std::string>(shrink, "--predictor-file", &RunConfig::predictor_path, "fitted predictor JSON");
  o.add<double>(shrink, "--lambda", &RunConfig::lambda, "ridge penalty");
  o.add<std::size_t>(shrink, "--train-size", &RunConfig::train_size, "ridge training pairs");
  o.flag(shrink, "--refit", &RunConfig::refit_each_iteration, "refit the ridge predictor after every iteration");
  o.add_with<std::size_t>(shrink, "--initial-sample-size",
                          [](RunConfig& c, std::size_t v) { c.shrink.initial_sample_size = v; }, "initial sample size");
  o.add_with<std::size_t>(shrink, "--seeds", [](RunConfig& c, std::size_t v) { c.shrink.seeds_per_iteration = v; },
                          "seeds per iteration");
  o.add_with<std::size_t>(shrink, "--neighbors", [](RunConfig& c, std::size_t v) { c.shrink.neighbors_per_seed = v; },
                          "neighbours per seed");
  o.add_with<double>(shrink, "--edit-threshold-fraction",
                     [](RunConfig& c, double v) { c.shrink.edit_threshold_fraction = v; },
                     "neighbour radius as a fraction of the total edit distance");
  o.add_with<double>(shrink, "--plateau-epsilon", [](RunConfig& c, double v) { c.shrink.plateau_epsilon = v; },
                     "minimum mean gain to keep iterating");
  o.add_with<int>(shrink, "--max-iterations", [](RunConfig& c, int v) { c.shrink.max_iterations = v; },
                  "iteration cap");
  o.add_with<std::uint64_t>(shrink, "--query-budget", [](RunConfig& c, std::uint64_t v) { c.shrink.query_budget = v; },
                            "predictor query budget");
  o.add<double>(shrink, "--x", &RunConfig::x, "kept fraction for naive-topx");
  o.add<std::size_t>(shrink, "--sample-budget", &RunConfig::sample_budget,
                     "naive-topx sample count (default: queries spent by lissnas)");
  o.add<double>(shrink, "--good-quantile", &RunConfig::good_quantile, "quantile of the initial sample deemed good");

  auto* loc = app.add_subcommand("analyze-locality", "random-walk autocorrelation and AAD curves");
  add_oracle_options(o, loc);
  o.add<int>(loc, "--walks", &RunConfig::walks, "number of walks");
  o.add<int>(loc, "--walk-length", &RunConfig::walk_length, "architectures per walk");
  o.add<int>(loc, "--max-lag", &RunConfig::max_lag, "largest lag");
  o.add<int>(loc, "--pairs", &RunConfig::pairs, "pairs per distance");

  auto* cmp = app.add_subcommand("compare", "compare shrunk spaces");
  add_oracle_options(o, cmp);
  o.add<int>(cmp, "--bins", &RunConfig::bins, "histogram bins");
  o.add<std::vector<std::string>>(cmp, "snapshots", &RunConfig::inputs, "snapshot CSV files");

  auto* rep = app.add_subcommand("report", "tabulate shrink summaries");
  o.add<std::vector<std::string>>(rep, "runs", &RunConfig::inputs, "run directories or summary.json files");

  for (auto* sub : {gen, shrink, loc, cmp, rep}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    o.apply(cfg);
    set_thread_count(cfg.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : cfg.threads);
    if (gen->parsed()) return cmd_gen_synthetic(cfg, out, err);
    if (shrink->parsed()) return cmd_shrink(cfg, out, err);
    if (loc->parsed()) return cmd_analyze_locality(cfg, out, err);
    if (cmp->parsed()) return cmd_compare(cfg, out, err);
    return cmd_report(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace lissnas::cli
