#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lissnas/architecture.hpp"
#include "lissnas/random.hpp"
#include "lissnas/space_spec.hpp"

namespace lissnas {

/// Draws n valid architectures i.i.d. Cells are sampled NASBench-style: random
/// upper-triangular max_nodes encoding and ops, pruned, rejected while invalid.
/// Output order is independent of the worker count.
std::vector<Architecture> sample_uniform(const SpaceSpec& spec, std::size_t n, Rng& rng);

inline constexpr std::uint64_t kMaxConsecutiveRejections = 1'000'000;

struct Cardinality {
  /// Raw encodings. Exact for blocks; for cells, max_nodes encodings within the edge budget.
  long double raw = 0;
  /// Isomorphism-free member count (blocks: equal to raw).
  long double deduplicated = 0;
  /// False when `deduplicated` is a Monte-Carlo estimate.
  bool deduplicated_exact = true;
};

inline constexpr std::size_t kDefaultDedupSamples = 100'000;

/// Cells: per node count k, live encodings are enumerated exactly; the number
/// of isomorphism classes is sum(1/class_size) over encodings, summed exactly
/// when there are at most `samples` labelled encodings and estimated from
/// `samples` uniform draws otherwise.
Cardinality raw_cardinality(const SpaceSpec& spec, std::size_t samples = kDefaultDedupSamples,
                            std::uint64_t seed = 0);

inline constexpr std::size_t kSnapshotMemberCap = 10'000'000;

struct SnapshotMember {
  CanonicalKey key;
  Architecture arch;
  double predicted = 0.0;
};

/// Explicit, isomorphism-free set of architectures with their predictions.
class SpaceSnapshot {
 public:
  SpaceSnapshot() = default;

  const std::vector<SnapshotMember>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  double mean_pred_acc() const noexcept { return mean_; }
  int iteration() const noexcept { return iteration_; }
  std::uint64_t query_count() const noexcept { return queries_; }

  void set_iteration(int iteration) { iteration_ = iteration; }
  void set_query_count(std::uint64_t queries) { queries_ = queries; }

  std::vector<Architecture> architectures() const;
  bool contains(const CanonicalKey& key) const;

 private:
  friend SpaceSnapshot snapshot_from(const std::vector<Architecture>&, const std::vector<double>&);
  friend SpaceSnapshot snapshot_from_members(std::vector<SnapshotMember>);

  std::vector<SnapshotMember> members_;
  std::vector<CanonicalKey> sorted_keys_;
  double mean_ = 0.0;
  int iteration_ = 0;
  std::uint64_t queries_ = 0;
};

/// Deduplicates by canonical key keeping the first occurrence.
SpaceSnapshot snapshot_from(const std::vector<Architecture>& archs, const std::vector<double>& predictions);
SpaceSnapshot snapshot_from_members(std::vector<SnapshotMember> members);

/// CSV with header canonical_key,architecture_text,predicted_acc.
std::string snapshot_to_csv(const SpaceSnapshot& snapshot);
void save_snapshot(const SpaceSnapshot& snapshot, const std::string& path);
SpaceSnapshot load_snapshot(const std::string& path, const SpaceSpec& spec);

/// Every member of a block space in lexicographic order; only for small spaces.
std::vector<Architecture> enumerate_block_space(const SpaceSpec& spec, std::size_t limit = 10'000'000);

}  // namespace lissnas
