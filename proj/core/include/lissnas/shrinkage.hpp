#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lissnas/architecture.hpp"
#include "lissnas/predictor.hpp"
#include "lissnas/random.hpp"
#include "lissnas/space_spec.hpp"
#include "lissnas/spaces.hpp"

namespace lissnas {

inline constexpr std::size_t kMinInitialSample = 1000;

struct ShrinkConfig {
  std::size_t initial_sample_size = 1000;
  std::size_t seeds_per_iteration = 50;
  std::size_t neighbors_per_seed = 20;
  double edit_threshold_fraction = 1.0 / 3.0;
  double plateau_epsilon = 1e-3;
  int max_iterations = 20;
  /// Cap on predictor evaluations (cached repeats are free).
  std::optional<std::uint64_t> query_budget;
  /// Permits initial_sample_size below kMinInitialSample.
  bool allow_small_initial_sample = false;
  MoveWeights move_weights;

  /// Throws InvalidArgument on violated invariants.
  void validate() const;
};

/// Neighbor threshold: ceil(edit_threshold_fraction * total_edit_distance), at least 1.
int neighbor_radius(const SpaceSpec& spec, double edit_threshold_fraction);

struct IterationRecord {
  int iteration = 0;
  std::size_t size = 0;
  double mean_pred_acc = 0.0;
  std::vector<CanonicalKey> seeds;
  std::uint64_t queries_cumulative = 0;
};

enum class StopReason { plateau, max_iterations, query_budget };
std::string to_string(StopReason reason);

/// Retained iterations only; mean_pred_acc strictly increases by more than
/// plateau_epsilon from one record to the next.
struct ShrinkTrace {
  std::string variant;
  std::vector<IterationRecord> iterations;
  std::size_t initial_size = 0;
  double initial_mean_pred_acc = 0.0;
  std::uint64_t total_queries = 0;
  int iterations_run = 0;  // candidate spaces built, retained or not
  StopReason stop_reason = StopReason::plateau;
  std::optional<double> rejected_mean_pred_acc;
};

struct ShrinkResult {
  SpaceSnapshot snapshot;
  ShrinkTrace trace;
  std::vector<Architecture> initial_sample;
};

/// Called after every retained iteration; a non-null return replaces the predictor.
using RefitHook = std::function<std::shared_ptr<const Predictor>(const SpaceSnapshot&)>;

/// Seed search + locality-based neighbor generation, iterated until the mean
/// predicted accuracy stops improving by more than plateau_epsilon.
ShrinkResult lissnas(const SpaceSpec& spec, const Predictor& predictor, const ShrinkConfig& cfg, Rng& rng,
                     const RefitHook& refit = {});

/// Same loop, but each seed's neighbors are replaced by uniform random draws.
ShrinkResult refill_without_locality(const SpaceSpec& spec, const Predictor& predictor, const ShrinkConfig& cfg,
                                     Rng& rng, const RefitHook& refit = {});

/// Samples sample_budget architectures and keeps the top x fraction by prediction.
SpaceSnapshot naive_topx(const SpaceSpec& spec, const Predictor& predictor, std::size_t sample_budget, double x,
                         Rng& rng);

/// CSV with header iteration,size,mean_pred_acc,queries_cumulative,variant.
std::string trace_to_csv(const ShrinkTrace& trace);
ShrinkTrace trace_from_csv(const std::string& text);

}  // namespace lissnas
