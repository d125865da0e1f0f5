#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lissnas/benchmark.hpp"
#include "lissnas/error.hpp"
#include "lissnas/shrinkage.hpp"

namespace lissnas::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kOracleMiss = 3,
  kBudgetError = 4,
  kDegenerateStatistics = 5,
};

int exit_code_for(ErrorKind kind);

/// Everything a command needs. Loaded from a JSON document, then overridden
/// field by field from command-line flags.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  unsigned threads = 0;  // 0: hardware concurrency
  bool plots = false;

  // space: preset name or spec JSON path
  std::string space = "synthetic_default";

  // oracle: benchmark CSV, else synthetic
  std::optional<std::string> benchmark;
  SyntheticParams synthetic;

  // predictor
  std::string predictor = "ridge";  // ridge | oracle_lookup | file
  double lambda = kDefaultRidgeLambda;
  std::size_t train_size = 1000;
  std::optional<std::string> predictor_path;
  bool refit_each_iteration = false;

  // shrink
  ShrinkConfig shrink;
  std::string variant = "lissnas";  // lissnas | no-locality | naive-topx
  double x = 0.05;
  std::optional<std::size_t> sample_budget;
  double good_quantile = 0.8;
  int shrink_n = 20;
  int shrink_k = 4;

  // analyze-locality
  int walks = 100;
  int walk_length = 100;
  std::optional<int> max_lag;
  int pairs = 1000;

  // compare / report
  int bins = 10;
  std::vector<std::string> inputs;

  // gen-synthetic
  std::size_t samples = 100'000;
  double enumeration_limit = 1e6;
};

/// Throws ParseError for malformed JSON, unknown keys or wrongly typed values.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json(const std::string& text);

/// Preset name (synthetic_default, shufflenet_v2, nasbench101) or spec JSON path.
SpaceSpec resolve_space(const std::string& space);

}  // namespace lissnas::cli
