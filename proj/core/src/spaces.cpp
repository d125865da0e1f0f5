#include "lissnas/spaces.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "lissnas/csv.hpp"
#include "lissnas/error.hpp"
#include "lissnas/parallel.hpp"

namespace lissnas {

namespace {

constexpr std::size_t kSampleChunk = 256;

BlockArchitecture sample_block(const SpaceSpec& spec, Rng& rng) {
  const auto& choices = spec.block_dims().choices;
  BlockArchitecture b;
  b.choices.reserve(choices.size());
  for (int c : choices) {
    std::uniform_int_distribution<int> dist(0, c - 1);
    b.choices.push_back(OpCode{static_cast<std::uint16_t>(dist(rng))});
  }
  return b;
}

CellArchitecture sample_cell(const SpaceSpec& spec, Rng& rng) {
  const auto& d = spec.cell_dims();
  const auto& inner = spec.intermediate_ops();
  const int n = d.max_nodes;
  std::uniform_int_distribution<std::size_t> op_dist(0, inner.empty() ? 0 : inner.size() - 1);
  std::bernoulli_distribution edge(0.5);
  for (std::uint64_t attempt = 0; attempt < kMaxConsecutiveRejections; ++attempt) {
    std::uint64_t bits = 0;
    int count = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (edge(rng)) {
          bits |= 1ULL << CellArchitecture::bit(i, j);
          ++count;
        }
      }
    }
    std::vector<OpCode> ops(static_cast<std::size_t>(n));
    ops.front() = d.input_op;
    ops.back() = d.output_op;
    for (int i = 1; i + 1 < n; ++i) ops[static_cast<std::size_t>(i)] = inner[op_dist(rng)];
    if (count > d.max_edges) continue;
    auto pruned = prune(CellArchitecture(n, bits, std::move(ops)));
    if (pruned) return *std::move(pruned);
  }
  throw Error(ErrorKind::RejectionOverflow,
              "no valid cell after " + std::to_string(kMaxConsecutiveRejections) + " consecutive draws");
}

long double binomial(int n, int k) {
  long double r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / i;
  return r;
}

// Live upper-triangular k-node adjacency words with at most max_edges edges.
std::vector<std::uint64_t> live_structures(int k, int max_edges) {
  std::vector<std::pair<int, int>> slots;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) slots.emplace_back(i, j);
  std::vector<std::uint64_t> out;
  const std::uint64_t total = 1ULL << slots.size();
  std::vector<OpCode> ops(static_cast<std::size_t>(k));
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    if (std::popcount(mask) > max_edges) continue;
    std::uint64_t bits = 0;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if ((mask >> s) & 1ULL) bits |= 1ULL << CellArchitecture::bit(slots[s].first, slots[s].second);
    }
    if (all_nodes_live(CellArchitecture(k, bits, ops))) out.push_back(bits);
  }
  return out;
}

// Number of distinct upper-triangular labelled encodings isomorphic to (bits, ops).
std::size_t class_size(int k, std::uint64_t bits, const std::vector<std::uint16_t>& ops) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::set<std::pair<std::uint64_t, std::vector<std::uint16_t>>> seen;
  do {
    std::uint64_t pb = 0;
    bool upper = true;
    for (int i = 0; i < k && upper; ++i) {
      for (int j = i + 1; j < k; ++j) {
        if (!((bits >> CellArchitecture::bit(i, j)) & 1ULL)) continue;
        const int pi = perm[static_cast<std::size_t>(i)];
        const int pj = perm[static_cast<std::size_t>(j)];
        if (pi > pj) {
          upper = false;
          break;
        }
        pb |= 1ULL << CellArchitecture::bit(pi, pj);
      }
    }
    if (!upper) continue;
    std::vector<std::uint16_t> pops(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) pops[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = ops[static_cast<std::size_t>(i)];
    seen.emplace(pb, std::move(pops));
  } while (k > 3 && std::next_permutation(perm.begin() + 1, perm.end() - 1));
  return seen.size();
}

}  // namespace

std::vector<Architecture> sample_uniform(const SpaceSpec& spec, std::size_t n, Rng& rng) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample size must be >= 1");
  const std::uint64_t master = rng();
  std::vector<Architecture> out(n, Architecture{BlockArchitecture{}});
  const std::size_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng local = substream(master, c);
    const std::size_t end = std::min(n, (c + 1) * kSampleChunk);
    for (std::size_t i = c * kSampleChunk; i < end; ++i) {
      if (spec.is_block()) {
        out[i] = sample_block(spec, local);
      } else {
        out[i] = sample_cell(spec, local);
      }
    }
  });
  return out;
}

Cardinality raw_cardinality(const SpaceSpec& spec, std::size_t samples, std::uint64_t seed) {
  Cardinality card;
  if (spec.is_block()) {
    long double prod = 1;
    for (int c : spec.block_dims().choices) prod *= c;
    card.raw = card.deduplicated = prod;
    return card;
  }

  const auto& d = spec.cell_dims();
  const auto& inner = spec.intermediate_ops();
  const int n = d.max_nodes;
  const int slots = n * (n - 1) / 2;
  const long double v = static_cast<long double>(inner.size());
  long double structures = 0;
  for (int e = 0; e <= std::min(d.max_edges, slots); ++e) structures += binomial(slots, e);
  card.raw = structures * std::pow(v, n - 2);

  if (samples == 0) samples = 1;
  long double classes = 0;
  for (int k = 2; k <= n; ++k) {
    const auto structs = live_structures(k, d.max_edges);
    if (structs.empty()) continue;
    const int free_nodes = k - 2;
    const long double labelled = static_cast<long double>(structs.size()) * std::pow(v, free_nodes);

    auto ops_for = [&](std::uint64_t label_index) {
      std::vector<std::uint16_t> ops(static_cast<std::size_t>(k));
      ops.front() = d.input_op.value;
      ops.back() = d.output_op.value;
      for (int i = 1; i + 1 < k; ++i) {
        ops[static_cast<std::size_t>(i)] = inner[label_index % inner.size()].value;
        label_index /= inner.size();
      }
      return ops;
    };

    if (labelled <= static_cast<long double>(samples)) {
      const auto labels = static_cast<std::uint64_t>(std::pow(v, free_nodes) + 0.5L);
      long double sum = 0;
      for (auto bits : structs) {
        for (std::uint64_t l = 0; l < labels; ++l) sum += 1.0L / class_size(k, bits, ops_for(l));
      }
      classes += sum;
    } else {
      card.deduplicated_exact = false;
      Rng rng = substream(seed, static_cast<std::uint64_t>(k));
      std::uniform_int_distribution<std::size_t> pick_struct(0, structs.size() - 1);
      std::uniform_int_distribution<std::size_t> pick_op(0, inner.size() - 1);
      std::vector<double> inv(samples);
      std::vector<std::pair<std::uint64_t, std::vector<std::uint16_t>>> draws;
      draws.reserve(samples);
      for (std::size_t s = 0; s < samples; ++s) {
        const auto bits = structs[pick_struct(rng)];
        std::vector<std::uint16_t> ops(static_cast<std::size_t>(k));
        ops.front() = d.input_op.value;
        ops.back() = d.output_op.value;
        for (int i = 1; i + 1 < k; ++i) ops[static_cast<std::size_t>(i)] = inner[pick_op(rng)].value;
        draws.emplace_back(bits, std::move(ops));
      }
      parallel_for(samples, [&](std::size_t s) {
        inv[s] = 1.0 / static_cast<double>(class_size(k, draws[s].first, draws[s].second));
      });
      long double mean = 0;
      for (double x : inv) mean += x;
      mean /= static_cast<long double>(samples);
      classes += mean * labelled;
    }
  }
  card.deduplicated = classes;
  return card;
}

// --- snapshots --------------------------------------------------------------

std::vector<Architecture> SpaceSnapshot::architectures() const {
  std::vector<Architecture> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.arch);
  return out;
}

bool SpaceSnapshot::contains(const CanonicalKey& key) const {
  return std::binary_search(sorted_keys_.begin(), sorted_keys_.end(), key);
}

SpaceSnapshot snapshot_from_members(std::vector<SnapshotMember> members) {
  if (members.empty()) throw Error(ErrorKind::EmptySnapshot, "snapshot needs at least one architecture");
  SpaceSnapshot snap;
  std::unordered_set<std::string> seen;
  seen.reserve(members.size() * 2);
  long double total = 0;
  for (auto& m : members) {
    if (!seen.insert(m.key.value).second) continue;
    if (snap.members_.size() >= kSnapshotMemberCap) {
      throw Error(ErrorKind::MemoryCap, "snapshot exceeds " + std::to_string(kSnapshotMemberCap) + " members");
    }
    total += m.predicted;
    snap.members_.push_back(std::move(m));
  }
  snap.mean_ = static_cast<double>(total / static_cast<long double>(snap.members_.size()));
  snap.sorted_keys_.reserve(snap.members_.size());
  for (const auto& m : snap.members_) snap.sorted_keys_.push_back(m.key);
  std::sort(snap.sorted_keys_.begin(), snap.sorted_keys_.end());
  return snap;
}

SpaceSnapshot snapshot_from(const std::vector<Architecture>& archs, const std::vector<double>& predictions) {
  if (archs.size() != predictions.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(archs.size()) + " architectures vs " +
                                               std::to_string(predictions.size()) + " predictions");
  }
  std::vector<SnapshotMember> members;
  members.reserve(archs.size());
  for (std::size_t i = 0; i < archs.size(); ++i) members.push_back({canonical_key(archs[i]), archs[i], predictions[i]});
  return snapshot_from_members(std::move(members));
}

std::string snapshot_to_csv(const SpaceSnapshot& snapshot) {
  std::string out = "canonical_key,architecture_text,predicted_acc\n";
  for (const auto& m : snapshot.members()) {
    out += m.key.value;
    out += ',';
    out += csv::quote(to_text(m.arch));
    out += ',';
    out += csv::format_double(m.predicted);
    out += '\n';
  }
  return out;
}

void save_snapshot(const SpaceSnapshot& snapshot, const std::string& path) {
  csv::write_file(path, snapshot_to_csv(snapshot));
}

SpaceSnapshot load_snapshot(const std::string& path, const SpaceSpec& spec) {
  const auto table = csv::read_file(path);
  if (table.header != csv::Row{"canonical_key", "architecture_text", "predicted_acc"}) {
    throw Error(ErrorKind::ParseError, path + ": expected header canonical_key,architecture_text,predicted_acc");
  }
  std::vector<SnapshotMember> members;
  members.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.line_numbers[r];
    Architecture arch = parse_architecture(row[1], spec);
    validate(arch, spec);
    CanonicalKey key = canonical_key(arch);
    if (key.value != row[0]) {
      throw Error(ErrorKind::ParseError, path + " line " + std::to_string(line) + ": canonical key mismatch");
    }
    members.push_back({std::move(key), std::move(arch), csv::parse_double(row[2], line)});
  }
  return snapshot_from_members(std::move(members));
}

std::vector<Architecture> enumerate_block_space(const SpaceSpec& spec, std::size_t limit) {
  const auto& choices = spec.block_dims().choices;
  long double total = 1;
  for (int c : choices) total *= c;
  if (total > static_cast<long double>(limit)) {
    throw Error(ErrorKind::TooLarge, "block space too large to enumerate");
  }
  std::vector<Architecture> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<OpCode> cur(choices.size());
  while (true) {
    out.push_back(BlockArchitecture{cur});
    // odometer, last layer fastest
    std::size_t l = choices.size();
    while (l > 0) {
      --l;
      if (++cur[l].value < choices[l]) break;
      cur[l].value = 0;
      if (l == 0) return out;
    }
  }
}

}  // namespace lissnas
