#include "lissnas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "lissnas/error.hpp"
#include "lissnas/parallel.hpp"
#include "lissnas/predictor.hpp"

namespace lissnas {

// --- locality ---------------------------------------------------------------

namespace {

// Uniform start, redrawn while it has no legal change (walks cannot leave it).
Architecture movable_start(const SpaceSpec& spec, Rng& rng, const MoveWeights& weights) {
  for (std::uint64_t tries = 0; tries < kMaxConsecutiveRejections; ++tries) {
    auto a = sample_uniform(spec, 1, rng).front();
    if (has_legal_move(a, spec, weights)) return a;
  }
  throw Error(ErrorKind::RejectionOverflow, "no architecture with a legal change found");
}

}  // namespace

RwaCurve rwa(const SpaceSpec& spec, const BenchmarkOracle& oracle, int walk_length, int num_walks, int max_lag,
             Rng& rng) {
  if (max_lag < 1 || walk_length <= max_lag) {
    throw Error(ErrorKind::InvalidArgument, "rwa needs walk_length > max_lag >= 1");
  }
  if (num_walks < 1) throw Error(ErrorKind::InvalidArgument, "rwa needs num_walks >= 1");

  const std::uint64_t master = rng();
  const auto walks = static_cast<std::size_t>(num_walks);
  const auto len = static_cast<std::size_t>(walk_length);
  std::vector<std::vector<double>> series(walks);
  parallel_for(walks, [&](std::size_t w) {
    Rng local = substream(master, w);
    const auto start = movable_start(spec, local, MoveWeights{});
    const auto walk = random_walk(start, walk_length - 1, spec, local);
    auto& s = series[w];
    s.reserve(len);
    for (const auto& a : walk) s.push_back(oracle.query(a).accuracy);
  });

  double lo = series[0][0], hi = series[0][0];
  for (const auto& s : series)
    for (double v : s) lo = std::min(lo, v), hi = std::max(hi, v);
  if (lo == hi) throw Error(ErrorKind::ZeroVariance, "accuracy is constant along every walk");

  RwaCurve curve;
  curve.lags.push_back(0);
  curve.autocorrelation.push_back(1.0);
  for (int lag = 1; lag <= max_lag; ++lag) {
    const auto l = static_cast<std::size_t>(lag);
    long double sx = 0, sy = 0;
    std::size_t count = 0;
    for (const auto& s : series) {
      for (std::size_t t = 0; t + l < len; ++t) {
        sx += s[t];
        sy += s[t + l];
        ++count;
      }
    }
    const long double mx = sx / count, my = sy / count;
    long double cxy = 0, cxx = 0, cyy = 0;
    for (const auto& s : series) {
      for (std::size_t t = 0; t + l < len; ++t) {
        const long double dx = s[t] - mx, dy = s[t + l] - my;
        cxy += dx * dy;
        cxx += dx * dx;
        cyy += dy * dy;
      }
    }
    if (cxx == 0 || cyy == 0) {
      throw Error(ErrorKind::ZeroVariance, "lagged accuracy series is constant at lag " + std::to_string(lag));
    }
    const double r = static_cast<double>(cxy / std::sqrt(cxx * cyy));
    curve.lags.push_back(lag);
    curve.autocorrelation.push_back(std::clamp(r, -1.0, 1.0));
  }
  return curve;
}

std::string to_string(ChangeFilter filter) {
  switch (filter) {
    case ChangeFilter::both: return "both";
    case ChangeFilter::operation: return "operation";
    case ChangeFilter::edge: return "edge";
  }
  return "unknown";
}

double aad(const SpaceSpec& spec, const BenchmarkOracle& oracle, int d, int num_pairs, Rng& rng,
           ChangeFilter filter) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "aad needs d >= 1");
  if (num_pairs < 1) throw Error(ErrorKind::InvalidArgument, "aad needs num_pairs >= 1");
  MoveWeights weights;
  if (filter == ChangeFilter::operation) weights = MoveWeights::only(ChangeType::op);
  if (filter == ChangeFilter::edge) weights = MoveWeights::only(ChangeType::edge);

  const std::uint64_t master = rng();
  std::vector<double> diffs(static_cast<std::size_t>(num_pairs));
  parallel_for(diffs.size(), [&](std::size_t i) {
    Rng local = substream(master, i);
    const auto x = movable_start(spec, local, weights);
    const auto y = walk_changes(x, d, spec, local, weights);
    diffs[i] = std::abs(oracle.query(x).accuracy - oracle.query(y).accuracy);
  });
  long double sum = 0;
  for (double v : diffs) sum += v;
  return static_cast<double>(sum / diffs.size());
}

// --- shrink index -----------------------------------------------------------

double prob_at_least_k(int n, int k, double p) {
  if (n < 0 || k < 0 || k > n || !(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::DomainError, "prob_at_least_k needs 0 <= k <= n and p in [0, 1]");
  }
  if (k == 0) return 1.0;
  if (k == n) return std::pow(p, n);
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double lgn = std::lgamma(n + 1.0);
  auto term = [&](int i) {
    return std::exp(lgn - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * lp + (n - i) * lq);
  };
  // Sum the smaller tail; both loops accumulate in a fixed order so the result is monotone in k.
  const int mode = static_cast<int>(std::floor((n + 1) * p));
  if (k > mode) {
    double upper = 0.0;
    for (int i = n; i >= k; --i) upper += term(i);
    return std::clamp(upper, 0.0, 1.0);
  }
  double lower = 0.0;
  for (int i = 0; i < k; ++i) lower += term(i);
  return std::clamp(1.0 - lower, 0.0, 1.0);
}

double fraction_at_least(const std::vector<double>& accuracies, double threshold) {
  if (accuracies.empty()) throw Error(ErrorKind::EmptyInput, "no accuracies to estimate p from");
  const auto good = std::count_if(accuracies.begin(), accuracies.end(), [&](double a) { return a >= threshold; });
  return static_cast<double>(good) / static_cast<double>(accuracies.size());
}

double estimate_p_good(const std::vector<Architecture>& archs, const BenchmarkOracle& oracle, double threshold_acc) {
  if (archs.empty()) throw Error(ErrorKind::EmptyInput, "no architectures to estimate p from");
  return fraction_at_least(true_accuracies(archs, oracle), threshold_acc);
}

double estimate_p_good(const SpaceSnapshot& snapshot, const BenchmarkOracle& oracle, double threshold_acc) {
  return estimate_p_good(snapshot.architectures(), oracle, threshold_acc);
}

ShrinkIndexReport shrink_index(const std::vector<Architecture>& init, const std::vector<Architecture>& shrunk,
                               const BenchmarkOracle& oracle, double threshold_acc, int n, int k) {
  ShrinkIndexReport r;
  r.threshold_acc = threshold_acc;
  r.n = n;
  r.k = k;
  r.p_init = estimate_p_good(init, oracle, threshold_acc);
  r.p_shrunk = estimate_p_good(shrunk, oracle, threshold_acc);
  r.s_i = r.p_shrunk - r.p_init;
  r.prob_at_least_k_init = prob_at_least_k(n, k, r.p_init);
  r.prob_at_least_k_shrunk = prob_at_least_k(n, k, r.p_shrunk);
  return r;
}

ShrinkIndexReport shrink_index(const std::vector<Architecture>& init, const SpaceSnapshot& shrunk,
                               const BenchmarkOracle& oracle, double threshold_acc, int n, int k) {
  return shrink_index(init, shrunk.architectures(), oracle, threshold_acc, n, k);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "quantile of empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::DomainError, "quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

// --- distributions ----------------------------------------------------------

Edf::Edf(const std::vector<double>& accuracies) : n_(accuracies.size()) {
  if (accuracies.empty()) throw Error(ErrorKind::EmptyInput, "EDF of an empty sample");
  std::vector<double> errors;
  errors.reserve(accuracies.size());
  for (double a : accuracies) {
    if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorKind::DomainError, "accuracy outside [0, 1]");
    errors.push_back(1.0 - a);
  }
  std::sort(errors.begin(), errors.end());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i + 1 < errors.size() && errors[i + 1] == errors[i]) continue;
    jumps_.push_back(errors[i]);
    cum_.push_back(static_cast<double>(i + 1) / static_cast<double>(n_));
  }
}

double Edf::operator()(double error) const {
  const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), error);
  if (it == jumps_.begin()) return 0.0;
  return cum_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
}

double Edf::auc() const {
  long double area = 0;
  for (std::size_t j = 0; j < jumps_.size(); ++j) {
    const double next = j + 1 < jumps_.size() ? jumps_[j + 1] : 1.0;
    area += static_cast<long double>(cum_[j]) * (static_cast<long double>(next) - jumps_[j]);
  }
  return static_cast<double>(area);
}

Edf error_edf(const std::vector<double>& accuracies) { return Edf(accuracies); }

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // small-lambda form: 1 - sqrt(2 pi)/lambda * sum exp(-(2j-1)^2 pi^2 / (8 lambda^2))
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int j = 1; j <= 50; ++j) {
      const double odd = 2.0 * j - 1.0;
      const double term = std::exp(odd * odd * c);
      sum += term;
      if (term < 1e-18) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(const Edf& a, const Edf& b) {
  if (a.count() < kKsMinObservations || b.count() < kKsMinObservations) {
    throw Error(ErrorKind::TooFewObservations, "KS test needs at least 5 observations per sample");
  }
  double d = 0.0;
  for (const auto* edf : {&a, &b}) {
    for (double t : edf->jumps()) d = std::max(d, std::abs(a(t) - b(t)));
  }
  const double m = static_cast<double>(a.count());
  const double n = static_cast<double>(b.count());
  const double ne = std::sqrt(m * n / (m + n));
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

// --- diversity --------------------------------------------------------------

CosineDiversity max_cosine_distance(const std::vector<Architecture>& archs, const SpaceSpec& spec,
                                    std::uint64_t seed) {
  if (archs.size() < 2) throw Error(ErrorKind::TooFew, "cosine distance needs at least 2 architectures");
  std::vector<std::size_t> index(archs.size());
  std::iota(index.begin(), index.end(), 0);
  CosineDiversity out;
  if (archs.size() > kCosineExactLimit) {
    Rng rng(derive_seed(seed, 0xc05));
    std::shuffle(index.begin(), index.end(), rng);
    index.resize(kCosineExactLimit);
    std::sort(index.begin(), index.end());
    out.subsampled = true;
  }
  out.evaluated = index.size();

  std::vector<std::vector<double>> emb(index.size());
  std::vector<double> sq(index.size());
  parallel_for(index.size(), [&](std::size_t i) {
    emb[i] = embed(archs[index[i]], spec);
    sq[i] = std::inner_product(emb[i].begin(), emb[i].end(), emb[i].begin(), 0.0);
  });
  std::vector<double> row_max(index.size(), 0.0);
  parallel_for(index.size(), [&](std::size_t i) {
    double best = 0.0;
    for (std::size_t j = i + 1; j < index.size(); ++j) {
      const double dot = std::inner_product(emb[i].begin(), emb[i].end(), emb[j].begin(), 0.0);
      const double denom = std::sqrt(sq[i] * sq[j]);
      const double dist = denom > 0.0 ? 1.0 - dot / denom : 1.0;
      best = std::max(best, dist);
    }
    row_max[i] = best;
  });
  out.value = std::clamp(*std::max_element(row_max.begin(), row_max.end()), 0.0, 2.0);
  return out;
}

std::string to_string(ResourceAxis axis) { return axis == ResourceAxis::flops ? "flops" : "params"; }

std::size_t Histogram::occupied() const {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

std::vector<double> histogram_edges(const std::vector<double>& reference, int bins) {
  if (bins < 1) throw Error(ErrorKind::InvalidArgument, "histogram needs bins >= 1");
  if (reference.empty()) throw Error(ErrorKind::EmptyInput, "histogram reference is empty");
  double lo = *std::min_element(reference.begin(), reference.end());
  double hi = *std::max_element(reference.begin(), reference.end());
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
  edges.back() = hi;
  return edges;
}

Histogram histogram(const std::vector<double>& values, const std::vector<double>& edges) {
  if (edges.size() < 2) throw Error(ErrorKind::InvalidArgument, "histogram needs at least one bin");
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "histogram of empty set");
  Histogram h;
  h.edges = edges;
  h.counts.assign(edges.size() - 1, 0);
  for (double v : values) {
    if (v < edges.front()) {
      ++h.below;
    } else if (v > edges.back()) {
      ++h.above;
    } else {
      auto it = std::upper_bound(edges.begin(), edges.end(), v);
      auto bin = static_cast<std::size_t>(it - edges.begin()) - 1;
      bin = std::min(bin, h.counts.size() - 1);
      ++h.counts[bin];
    }
  }
  return h;
}

std::vector<double> resource_values(const std::vector<Architecture>& archs, const BenchmarkOracle& oracle,
                                    ResourceAxis axis) {
  std::vector<double> out(archs.size());
  parallel_for(archs.size(), [&](std::size_t i) {
    const auto rec = oracle.query(archs[i]);
    out[i] = axis == ResourceAxis::flops ? rec.flops : rec.params;
  });
  return out;
}

Histogram resource_histogram(const std::vector<Architecture>& archs, const std::vector<Architecture>& full_space,
                             const BenchmarkOracle& oracle, ResourceAxis axis, int bins) {
  if (archs.empty() || full_space.empty()) throw Error(ErrorKind::EmptyInput, "resource histogram of empty set");
  const auto edges = histogram_edges(resource_values(full_space, oracle, axis), bins);
  return histogram(resource_values(archs, oracle, axis), edges);
}

Histogram resource_histogram(const std::vector<Architecture>& archs, const BenchmarkOracle& oracle,
                             ResourceAxis axis, int bins) {
  return resource_histogram(archs, archs, oracle, axis, bins);
}

std::vector<double> true_accuracies(const std::vector<Architecture>& archs, const BenchmarkOracle& oracle) {
  std::vector<double> out(archs.size());
  parallel_for(archs.size(), [&](std::size_t i) { out[i] = oracle.query(archs[i]).accuracy; });
  return out;
}

}  // namespace lissnas
