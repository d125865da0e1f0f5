#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "lissnas/architecture.hpp"
#include "lissnas/space_spec.hpp"

namespace lissnas {

struct BenchmarkRecord {
  CanonicalKey key;
  double accuracy = 0.0;  // fraction in [0, 1]
  double flops = 0.0;     // multiply-adds
  double params = 0.0;

  friend bool operator==(const BenchmarkRecord&, const BenchmarkRecord&) = default;
};

struct SyntheticParams {
  double locality_strength = 1.0;
  double noise_sigma = 0.02;
  std::uint64_t seed = 0;
};

/// Synthetic accuracy model. Blocks:
///   acc = clamp01(mean + sum_l w[l][c_l] + s * sum_l v[l][c_l][c_{l+1}] + eps)
/// Cells use isomorphism-invariant positions instead of node slots: one term
/// per intermediate node keyed by its op, one per edge keyed by the (src, dst)
/// op pair, and interaction terms over two-edge paths keyed by the op triple.
/// eps ~ Normal(0, noise_sigma) is derived from (canonical key, seed).
struct SyntheticModel {
  double mean = 0.0;
  std::vector<std::vector<double>> unary;                 // block: [layer][choice]; cell: [0][op]
  std::vector<std::vector<std::vector<double>>> pairwise; // block: [layer][c][c']; cell: [src][dst]
  std::vector<double> triples;                            // cell only: flattened [a][b][c]
  // resource model
  double flops_base = 0.0, flops_per_unit = 0.0;
  double params_base = 0.0, params_per_unit = 0.0;
};

inline constexpr double kSyntheticMean = 0.8;
inline constexpr double kSyntheticUnaryScale = 0.008;
inline constexpr double kSyntheticPairScale = 0.04;

/// Ground-truth oracle: a table keyed by canonical key, or a synthetic model.
/// Immutable apart from the atomic query tally; safe for concurrent queries.
class BenchmarkOracle {
 public:
  enum class Kind { tabular, synthetic };

  BenchmarkOracle(const BenchmarkOracle& other);
  BenchmarkOracle& operator=(const BenchmarkOracle&) = delete;

  static BenchmarkOracle tabular(SpaceSpec spec, std::vector<std::pair<Architecture, BenchmarkRecord>> rows);
  static BenchmarkOracle synthetic(SpaceSpec spec, const SyntheticParams& params);

  Kind kind() const noexcept { return kind_; }
  const SpaceSpec& spec() const noexcept { return spec_; }
  const SyntheticParams& synthetic_params() const noexcept { return params_; }
  const SyntheticModel& synthetic_model() const noexcept { return model_; }

  /// Throws MissingKey for tabular misses.
  BenchmarkRecord query(const Architecture& arch) const;
  BenchmarkRecord query(const Architecture& arch, const CanonicalKey& key) const;
  bool contains(const CanonicalKey& key) const;

  std::uint64_t query_count() const noexcept { return queries_->load(); }
  void reset_query_count() const noexcept { queries_->store(0); }

  /// Tabular rows in canonical-key order.
  std::vector<std::pair<Architecture, BenchmarkRecord>> table_rows() const;
  std::size_t table_size() const noexcept { return table_.size(); }

 private:
  BenchmarkOracle(Kind kind, SpaceSpec spec);

  BenchmarkRecord evaluate(const Architecture& arch, const CanonicalKey& key) const;

  Kind kind_;
  SpaceSpec spec_;
  SyntheticParams params_;
  SyntheticModel model_;
  std::unordered_map<std::string, std::pair<Architecture, BenchmarkRecord>> table_;
  std::unique_ptr<std::atomic<std::uint64_t>> queries_;
};

/// Synthetic accuracy without the noise term and without touching the tally.
double synthetic_signal(const BenchmarkOracle& oracle, const Architecture& arch);

/// CSV schema (header required): architecture_text,accuracy,flops,params.
/// Cells are pruned before validation; duplicate keys keep the maximum accuracy.
BenchmarkOracle load_table(const std::string& path, const SpaceSpec& spec);
std::string table_to_csv(const BenchmarkOracle& oracle);
void save_table(const BenchmarkOracle& oracle, const std::string& path);

/// Records of the given architectures as a benchmark CSV (synthetic export).
std::string records_to_csv(const std::vector<Architecture>& archs, const BenchmarkOracle& oracle);

}  // namespace lissnas
