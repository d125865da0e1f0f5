#include "lissnas/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "lissnas/csv.hpp"
#include "lissnas/error.hpp"
#include "lissnas/parallel.hpp"

namespace lissnas {

void ShrinkConfig::validate() const {
  if (initial_sample_size == 0) throw Error(ErrorKind::InvalidArgument, "initial_sample_size must be >= 1");
  if (initial_sample_size < kMinInitialSample && !allow_small_initial_sample) {
    throw Error(ErrorKind::InvalidArgument, "initial_sample_size below 1000 needs allow_small_initial_sample");
  }
  if (seeds_per_iteration == 0) throw Error(ErrorKind::InvalidArgument, "seeds_per_iteration must be >= 1");
  if (!(edit_threshold_fraction > 0.0 && edit_threshold_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "edit_threshold_fraction must lie in (0, 1]");
  }
  if (!(plateau_epsilon >= 0.0)) throw Error(ErrorKind::InvalidArgument, "plateau_epsilon must be >= 0");
  if (max_iterations < 1) throw Error(ErrorKind::InvalidArgument, "max_iterations must be >= 1");
}

int neighbor_radius(const SpaceSpec& spec, double edit_threshold_fraction) {
  const int total = total_edit_distance(spec);
  // guard against 1/3 * 12 landing a hair above 4
  const int r = static_cast<int>(std::ceil(edit_threshold_fraction * total - 1e-9));
  return std::clamp(r, 1, total);
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::plateau: return "plateau";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::query_budget: return "query_budget";
  }
  return "unknown";
}

namespace {

enum class Refill { neighbors, uniform };

// Memoizes predictions by canonical key and counts distinct evaluations.
class PredictionCache {
 public:
  explicit PredictionCache(const Predictor& p) : predictor_(&p) {}

  void reset(const Predictor& p) {
    predictor_ = &p;
    values_.clear();
  }

  std::size_t missing(const std::vector<SnapshotMember>& members) const {
    std::size_t n = 0;
    for (const auto& m : members) n += values_.count(m.key.value) == 0;
    return n;
  }

  // Fills members[i].predicted, evaluating unseen keys in parallel.
  void fill(std::vector<SnapshotMember>& members) {
    std::vector<std::size_t> todo;
    std::unordered_map<std::string, std::size_t> first;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (values_.count(members[i].key.value)) continue;
      if (first.emplace(members[i].key.value, i).second) todo.push_back(i);
    }
    std::vector<double> out(todo.size());
    parallel_for(todo.size(), [&](std::size_t t) { out[t] = predictor_->predict(members[todo[t]].arch); });
    for (std::size_t t = 0; t < todo.size(); ++t) values_.emplace(members[todo[t]].key.value, out[t]);
    queries_ += todo.size();
    for (auto& m : members) m.predicted = values_.at(m.key.value);
  }

  std::uint64_t queries() const noexcept { return queries_; }

 private:
  const Predictor* predictor_;
  std::unordered_map<std::string, double> values_;
  std::uint64_t queries_ = 0;
};

std::vector<SnapshotMember> ranked(const SpaceSnapshot& snap) {
  std::vector<SnapshotMember> members = snap.members();
  std::stable_sort(members.begin(), members.end(), [](const SnapshotMember& a, const SnapshotMember& b) {
    if (a.predicted != b.predicted) return a.predicted > b.predicted;
    return a.key < b.key;
  });
  return members;
}

std::vector<SnapshotMember> dedupe(std::vector<SnapshotMember> members) {
  std::unordered_map<std::string, bool> seen;
  std::vector<SnapshotMember> out;
  out.reserve(members.size());
  for (auto& m : members) {
    if (seen.emplace(m.key.value, true).second) out.push_back(std::move(m));
  }
  return out;
}

ShrinkResult run_loop(const SpaceSpec& spec, const Predictor& predictor, const ShrinkConfig& cfg, Rng& rng,
                      const RefitHook& refit, Refill refill) {
  cfg.validate();
  if (cfg.query_budget && *cfg.query_budget < cfg.initial_sample_size) {
    throw Error(ErrorKind::BudgetExhaustedBeforeFirstIteration,
                "query budget " + std::to_string(*cfg.query_budget) + " < initial sample size " +
                    std::to_string(cfg.initial_sample_size));
  }

  const std::uint64_t master = rng();
  const int radius = neighbor_radius(spec, cfg.edit_threshold_fraction);

  ShrinkResult result;
  result.trace.variant = refill == Refill::neighbors ? "lissnas" : "no_locality";

  Rng sample_rng = substream(master, 0);
  result.initial_sample = sample_uniform(spec, cfg.initial_sample_size, sample_rng);

  std::shared_ptr<const Predictor> owned;
  PredictionCache cache(predictor);
  std::vector<SnapshotMember> initial;
  initial.reserve(result.initial_sample.size());
  for (const auto& a : result.initial_sample) initial.push_back({canonical_key(a), a, 0.0});
  initial = dedupe(std::move(initial));
  cache.fill(initial);

  SpaceSnapshot current = snapshot_from_members(std::move(initial));
  current.set_iteration(0);
  current.set_query_count(cache.queries());
  result.trace.initial_size = current.size();
  result.trace.initial_mean_pred_acc = current.mean_pred_acc();

  std::optional<SpaceSnapshot> retained;
  result.trace.stop_reason = StopReason::max_iterations;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const auto order = ranked(current);
    const std::size_t num_seeds = std::min(cfg.seeds_per_iteration, order.size());
    std::vector<SnapshotMember> seeds(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(num_seeds));

    std::vector<std::vector<Architecture>> grown(num_seeds);
    const std::uint64_t it_master = derive_seed(master, static_cast<std::uint64_t>(it));
    parallel_for(num_seeds, [&](std::size_t s) {
      Rng local = substream(it_master, s);
      auto& out = grown[s];
      out.reserve(cfg.neighbors_per_seed);
      if (refill == Refill::neighbors) {
        if (!has_legal_move(seeds[s].arch, spec, cfg.move_weights)) return;
        for (std::size_t k = 0; k < cfg.neighbors_per_seed; ++k) {
          out.push_back(generate_neighbor(seeds[s].arch, radius, spec, local, cfg.move_weights));
        }
      } else if (cfg.neighbors_per_seed > 0) {
        out = sample_uniform(spec, cfg.neighbors_per_seed, local);
      }
    });

    std::vector<SnapshotMember> candidates = seeds;
    for (auto& group : grown) {
      for (auto& a : group) {
        CanonicalKey key = canonical_key(a);
        candidates.push_back({std::move(key), std::move(a), 0.0});
      }
    }
    candidates = dedupe(std::move(candidates));
    if (candidates.size() > kSnapshotMemberCap) {
      throw Error(ErrorKind::MemoryCap, "candidate space exceeds the snapshot member cap");
    }

    if (cfg.query_budget && cache.queries() + cache.missing(candidates) > *cfg.query_budget) {
      result.trace.stop_reason = StopReason::query_budget;
      break;
    }
    cache.fill(candidates);
    ++result.trace.iterations_run;

    SpaceSnapshot candidate = snapshot_from_members(std::move(candidates));
    candidate.set_iteration(it);
    candidate.set_query_count(cache.queries());

    const bool improved = !retained || candidate.mean_pred_acc() > retained->mean_pred_acc() + cfg.plateau_epsilon;
    if (!improved) {
      result.trace.stop_reason = StopReason::plateau;
      result.trace.rejected_mean_pred_acc = candidate.mean_pred_acc();
      break;
    }

    IterationRecord rec;
    rec.iteration = it;
    rec.size = candidate.size();
    rec.mean_pred_acc = candidate.mean_pred_acc();
    rec.queries_cumulative = cache.queries();
    for (const auto& s : seeds) rec.seeds.push_back(s.key);
    result.trace.iterations.push_back(std::move(rec));

    retained = candidate;
    current = std::move(candidate);

    if (refit && it < cfg.max_iterations) {
      if (auto next = refit(current)) {
        owned = std::move(next);
        cache.reset(*owned);
        // The retained space keeps its recorded predictions; later candidates use the new model.
      }
    }
  }

  result.trace.total_queries = cache.queries();
  // Monotone trace: the last retained snapshot has the best mean.
  result.snapshot = retained ? std::move(*retained) : std::move(current);
  return result;
}

}  // namespace

ShrinkResult lissnas(const SpaceSpec& spec, const Predictor& predictor, const ShrinkConfig& cfg, Rng& rng,
                     const RefitHook& refit) {
  return run_loop(spec, predictor, cfg, rng, refit, Refill::neighbors);
}

ShrinkResult refill_without_locality(const SpaceSpec& spec, const Predictor& predictor, const ShrinkConfig& cfg,
                                     Rng& rng, const RefitHook& refit) {
  return run_loop(spec, predictor, cfg, rng, refit, Refill::uniform);
}

SpaceSnapshot naive_topx(const SpaceSpec& spec, const Predictor& predictor, std::size_t sample_budget, double x,
                         Rng& rng) {
  if (!(x > 0.0 && x <= 1.0)) throw Error(ErrorKind::InvalidArgument, "x must lie in (0, 1]");
  const auto sample = sample_uniform(spec, sample_budget, rng);
  std::vector<SnapshotMember> members;
  members.reserve(sample.size());
  for (const auto& a : sample) members.push_back({canonical_key(a), a, 0.0});
  members = dedupe(std::move(members));
  PredictionCache cache(predictor);
  cache.fill(members);

  SpaceSnapshot all = snapshot_from_members(std::move(members));
  auto order = ranked(all);
  const auto keep = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(x * static_cast<double>(order.size()) - 1e-9)), 1, order.size());
  order.erase(order.begin() + static_cast<std::ptrdiff_t>(keep), order.end());
  SpaceSnapshot out = snapshot_from_members(std::move(order));
  out.set_query_count(sample_budget);
  return out;
}

std::string trace_to_csv(const ShrinkTrace& trace) {
  std::string out = "iteration,size,mean_pred_acc,queries_cumulative,variant\n";
  for (const auto& r : trace.iterations) {
    out += std::to_string(r.iteration) + "," + std::to_string(r.size) + "," + csv::format_double(r.mean_pred_acc) +
           "," + std::to_string(r.queries_cumulative) + "," + trace.variant + "\n";
  }
  return out;
}

ShrinkTrace trace_from_csv(const std::string& text) {
  const auto table = csv::parse(text);
  if (table.header != csv::Row{"iteration", "size", "mean_pred_acc", "queries_cumulative", "variant"}) {
    throw Error(ErrorKind::ParseError, "trace CSV: unexpected header");
  }
  ShrinkTrace trace;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.line_numbers[r];
    IterationRecord rec;
    try {
      rec.iteration = std::stoi(row[0]);
      rec.size = std::stoull(row[1]);
      rec.queries_cumulative = std::stoull(row[3]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "trace CSV line " + std::to_string(line) + ": bad integer");
    }
    rec.mean_pred_acc = csv::parse_double(row[2], line);
    trace.variant = row[4];
    trace.iterations.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace lissnas
