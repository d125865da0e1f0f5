#include "config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lissnas/error.hpp"

namespace lissnas::cli {

using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingKey:
      return kOracleMiss;
    case ErrorKind::BudgetExhaustedBeforeFirstIteration:
      return kBudgetError;
    case ErrorKind::ZeroVariance:
    case ErrorKind::TooFew:
    case ErrorKind::TooFewObservations:
      return kDegenerateStatistics;
    case ErrorKind::InvalidArgument:
    case ErrorKind::ParseError:
    case ErrorKind::SpecViolation:
    case ErrorKind::SpaceMismatch:
    case ErrorKind::LengthMismatch:
    case ErrorKind::EmptyBenchmark:
    case ErrorKind::EmptySnapshot:
    case ErrorKind::EmptyInput:
    case ErrorKind::DomainError:
      return kConfigError;
    default:
      return kFailure;
  }
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(ErrorKind::ParseError, "config: '" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw Error(ErrorKind::ParseError, "config: unknown key '" + where + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& into) {
  if (obj.contains(key)) into = obj.at(key).get<T>();
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& into) {
  if (obj.contains(key) && !obj.at(key).is_null()) into = obj.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  RunConfig cfg;
  try {
    const json j = json::parse(text);
    check_keys(j, "", {"seed", "out", "threads", "plots", "space", "oracle", "predictor", "shrink", "locality",
                       "compare", "gen"});
    read(j, "seed", cfg.seed);
    read(j, "out", cfg.out);
    read(j, "threads", cfg.threads);
    read(j, "plots", cfg.plots);
    read(j, "space", cfg.space);

    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      check_keys(o, "oracle.", {"benchmark", "synthetic"});
      read(o, "benchmark", cfg.benchmark);
      if (o.contains("synthetic")) {
        const auto& s = o.at("synthetic");
        check_keys(s, "oracle.synthetic.", {"locality_strength", "noise_sigma", "seed"});
        read(s, "locality_strength", cfg.synthetic.locality_strength);
        read(s, "noise_sigma", cfg.synthetic.noise_sigma);
        read(s, "seed", cfg.synthetic.seed);
      }
    }
    if (j.contains("predictor")) {
      const auto& p = j.at("predictor");
      check_keys(p, "predictor.", {"kind", "lambda", "train_size", "path"});
      read(p, "kind", cfg.predictor);
      read(p, "lambda", cfg.lambda);
      read(p, "train_size", cfg.train_size);
      read(p, "path", cfg.predictor_path);
    }
    if (j.contains("shrink")) {
      const auto& s = j.at("shrink");
      check_keys(s, "shrink.",
                 {"variant", "initial_sample_size", "seeds_per_iteration", "neighbors_per_seed",
                  "edit_threshold_fraction", "plateau_epsilon", "max_iterations", "query_budget",
                  "allow_small_initial_sample", "refit_each_iteration", "x", "sample_budget", "good_quantile", "n",
                  "k"});
      read(s, "variant", cfg.variant);
      read(s, "initial_sample_size", cfg.shrink.initial_sample_size);
      read(s, "seeds_per_iteration", cfg.shrink.seeds_per_iteration);
      read(s, "neighbors_per_seed", cfg.shrink.neighbors_per_seed);
      read(s, "edit_threshold_fraction", cfg.shrink.edit_threshold_fraction);
      read(s, "plateau_epsilon", cfg.shrink.plateau_epsilon);
      read(s, "max_iterations", cfg.shrink.max_iterations);
      read(s, "query_budget", cfg.shrink.query_budget);
      read(s, "allow_small_initial_sample", cfg.shrink.allow_small_initial_sample);
      read(s, "refit_each_iteration", cfg.refit_each_iteration);
      read(s, "x", cfg.x);
      read(s, "sample_budget", cfg.sample_budget);
      read(s, "good_quantile", cfg.good_quantile);
      read(s, "n", cfg.shrink_n);
      read(s, "k", cfg.shrink_k);
    }
    if (j.contains("locality")) {
      const auto& l = j.at("locality");
      check_keys(l, "locality.", {"walks", "walk_length", "max_lag", "pairs"});
      read(l, "walks", cfg.walks);
      read(l, "walk_length", cfg.walk_length);
      read(l, "max_lag", cfg.max_lag);
      read(l, "pairs", cfg.pairs);
    }
    if (j.contains("compare")) {
      const auto& c = j.at("compare");
      check_keys(c, "compare.", {"bins", "inputs"});
      read(c, "bins", cfg.bins);
      read(c, "inputs", cfg.inputs);
    }
    if (j.contains("gen")) {
      const auto& g = j.at("gen");
      check_keys(g, "gen.", {"samples", "enumeration_limit"});
      read(g, "samples", cfg.samples);
      read(g, "enumeration_limit", cfg.enumeration_limit);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return run_config_from_json(buf.str());
}

SpaceSpec resolve_space(const std::string& space) {
  if (space == "synthetic_default") return SpaceSpec::synthetic_default();
  if (space == "shufflenet_v2") return SpaceSpec::shufflenet_v2();
  if (space == "nasbench101") return SpaceSpec::nasbench101();
  if (!std::filesystem::exists(space)) {
    throw Error(ErrorKind::ParseError, "space '" + space + "' is neither a preset nor an existing spec file");
  }
  return load_spec(space);
}

}  // namespace lissnas::cli
