#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lissnas/architecture.hpp"
#include "lissnas/benchmark.hpp"
#include "lissnas/space_spec.hpp"

namespace lissnas {

/// Block: concatenated per-layer one-hot. Cell: max_nodes-frame upper-triangle
/// bits followed by, for each intermediate slot, a one-hot over the
/// intermediate ops plus an "absent" category. Embeds the stored encoding, so
/// canonicalize first when comparing isomorphic cells.
std::vector<double> embed(const Architecture& arch, const SpaceSpec& spec);
std::size_t embedding_length(const SpaceSpec& spec);

/// Cheap accuracy estimate; implementations must be safe for concurrent calls.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual double predict(const Architecture& arch) const = 0;
  virtual std::string kind() const = 0;
};

inline constexpr double kDefaultRidgeLambda = 1e-3;

class RidgePredictor final : public Predictor {
 public:
  RidgePredictor(SpaceSpec spec, std::vector<double> weights, double bias, double lambda);

  double predict(const Architecture& arch) const override;
  /// Unclamped w.e + b.
  double raw_score(const Architecture& arch) const;
  std::string kind() const override { return "ridge"; }

  const SpaceSpec& spec() const noexcept { return spec_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }
  double lambda() const noexcept { return lambda_; }

  /// {"kind":"ridge","lambda":..,"bias":..,"weights":[..],"space":{..}}
  std::string to_json() const;
  static RidgePredictor from_json(const std::string& text);

 private:
  SpaceSpec spec_;
  std::vector<double> weights_;
  double bias_;
  double lambda_;
};

/// Minimizes sum_i s_i (y_i - w.e_i - b)^2 + lambda |w|^2 in closed form, bias
/// unregularized. sample_weights defaults to all ones.
RidgePredictor fit_ridge(const std::vector<std::pair<Architecture, double>>& pairs, const SpaceSpec& spec,
                         double lambda, const std::vector<double>& sample_weights = {});

/// Passes through the oracle's accuracy. The oracle must outlive the predictor.
class OracleLookupPredictor final : public Predictor {
 public:
  explicit OracleLookupPredictor(const BenchmarkOracle& oracle) : oracle_(oracle) {}

  double predict(const Architecture& arch) const override { return oracle_.query(arch).accuracy; }
  std::string kind() const override { return "oracle_lookup"; }

 private:
  const BenchmarkOracle& oracle_;
};

void save_predictor(const RidgePredictor& predictor, const std::string& path);
RidgePredictor load_predictor(const std::string& path);

}  // namespace lissnas
