#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lissnas/architecture.hpp"
#include "lissnas/benchmark.hpp"
#include "lissnas/random.hpp"
#include "lissnas/space_spec.hpp"
#include "lissnas/spaces.hpp"

namespace lissnas {

// --- locality ---------------------------------------------------------------

struct RwaCurve {
  std::vector<int> lags;               // 0..max_lag
  std::vector<double> autocorrelation; // [0] == 1
};

/// Pearson correlation of oracle accuracies at each lag, pooling the lagged
/// pairs of all walks before computing one coefficient per lag.
RwaCurve rwa(const SpaceSpec& spec, const BenchmarkOracle& oracle, int walk_length, int num_walks, int max_lag,
             Rng& rng);

enum class ChangeFilter { both, operation, edge };
std::string to_string(ChangeFilter filter);

/// Mean |acc(x) - acc(x')| where x is uniform and x' is exactly d sequential
/// atomic changes away from x (no immediate backtracking).
double aad(const SpaceSpec& spec, const BenchmarkOracle& oracle, int d, int num_pairs, Rng& rng,
           ChangeFilter filter = ChangeFilter::both);

// --- shrink index -----------------------------------------------------------

/// P(at least k of n i.i.d. draws are good) = sum_{i=k}^{n} C(n,i) p^i (1-p)^(n-i).
double prob_at_least_k(int n, int k, double p);

/// Fraction of the given accuracies at or above threshold.
double fraction_at_least(const std::vector<double>& accuracies, double threshold);
double estimate_p_good(const std::vector<Architecture>& archs, const BenchmarkOracle& oracle, double threshold_acc);
double estimate_p_good(const SpaceSnapshot& snapshot, const BenchmarkOracle& oracle, double threshold_acc);

struct ShrinkIndexReport {
  double p_init = 0.0;
  double p_shrunk = 0.0;
  double threshold_acc = 0.0;
  double s_i = 0.0;  // p_shrunk - p_init
  int n = 20;
  int k = 4;
  double prob_at_least_k_init = 0.0;
  double prob_at_least_k_shrunk = 0.0;
};

ShrinkIndexReport shrink_index(const std::vector<Architecture>& init, const std::vector<Architecture>& shrunk,
                               const BenchmarkOracle& oracle, double threshold_acc, int n = 20, int k = 4);
ShrinkIndexReport shrink_index(const std::vector<Architecture>& init, const SpaceSnapshot& shrunk,
                               const BenchmarkOracle& oracle, double threshold_acc, int n = 20, int k = 4);

/// q-quantile (linear interpolation) of accuracies.
double quantile(std::vector<double> values, double q);

// --- distributions ----------------------------------------------------------

/// Right-continuous step function over errors (1 - accuracy).
class Edf {
 public:
  explicit Edf(const std::vector<double>& accuracies);

  const std::vector<double>& jumps() const noexcept { return jumps_; }        // distinct errors, ascending
  const std::vector<double>& cumulative() const noexcept { return cum_; }     // F at each jump
  std::size_t count() const noexcept { return n_; }

  double operator()(double error) const;
  /// Integral of F over [0, 1].
  double auc() const;

 private:
  std::vector<double> jumps_;
  std::vector<double> cum_;
  std::size_t n_ = 0;
};

Edf error_edf(const std::vector<double>& accuracies);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

inline constexpr std::size_t kKsMinObservations = 5;

/// sup |F_a - F_b| over all jump points; p-value from the asymptotic
/// Kolmogorov series with effective size mn/(m+n).
KsResult ks_two_sample(const Edf& a, const Edf& b);
/// Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);

// --- diversity --------------------------------------------------------------

struct CosineDiversity {
  double value = 0.0;
  std::size_t evaluated = 0;  // architectures compared
  bool subsampled = false;
};

inline constexpr std::size_t kCosineExactLimit = 10'000;

/// Max over pairs of 1 - cos(embed(a), embed(b)). Exact over all pairs up to
/// kCosineExactLimit architectures, else over a uniform subsample of that size.
CosineDiversity max_cosine_distance(const std::vector<Architecture>& archs, const SpaceSpec& spec,
                                    std::uint64_t seed = 0);

enum class ResourceAxis { flops, params };
std::string to_string(ResourceAxis axis);

struct Histogram {
  std::vector<double> edges;        // bins+1 ascending
  std::vector<std::size_t> counts;  // bins
  std::size_t below = 0, above = 0; // outside [edges.front(), edges.back()]

  std::size_t occupied() const;
};

/// Equal-width edges spanning the observed min/max of `reference`.
std::vector<double> histogram_edges(const std::vector<double>& reference, int bins);
Histogram histogram(const std::vector<double>& values, const std::vector<double>& edges);

std::vector<double> resource_values(const std::vector<Architecture>& archs, const BenchmarkOracle& oracle,
                                    ResourceAxis axis);
/// Histogram of `archs` with edges spanning `full_space`'s observed range.
Histogram resource_histogram(const std::vector<Architecture>& archs, const std::vector<Architecture>& full_space,
                             const BenchmarkOracle& oracle, ResourceAxis axis, int bins);
Histogram resource_histogram(const std::vector<Architecture>& archs, const BenchmarkOracle& oracle,
                             ResourceAxis axis, int bins);

/// True accuracies of architectures from the oracle, in order.
std::vector<double> true_accuracies(const std::vector<Architecture>& archs, const BenchmarkOracle& oracle);

}  // namespace lissnas
