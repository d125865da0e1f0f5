#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "lissnas/benchmark.hpp"
#include "lissnas/metrics.hpp"
#include "lissnas/parallel.hpp"
#include "lissnas/shrinkage.hpp"
#include "lissnas/spaces.hpp"

using namespace lissnas;

namespace {

const std::vector<Architecture>& cells() {
  static const auto archs = [] {
    Rng rng(1);
    return sample_uniform(SpaceSpec::nasbench101(), 256, rng);
  }();
  return archs;
}

CellDims six_node_dims() {
  CellDims d;
  d.max_nodes = 6;
  d.max_edges = 9;
  d.ops = {"input", "conv3x3", "conv1x1", "maxpool3x3", "output"};
  d.input_op = OpCode{0};
  d.output_op = OpCode{4};
  return d;
}

}  // namespace

static void BM_CanonicalKeyCell(benchmark::State& st) {
  const auto& archs = cells();
  std::size_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(canonical_key(archs[i++ % archs.size()]));
  }
  st.SetItemsProcessed(st.iterations());
}
BENCHMARK(BM_CanonicalKeyCell);

static void BM_EditDistanceCell(benchmark::State& st) {
  const auto spec = SpaceSpec::cell(six_node_dims());
  Rng rng(2);
  const auto archs = sample_uniform(spec, 256, rng);
  std::size_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(edit_distance(archs[i % archs.size()], archs[(i + 1) % archs.size()], spec));
    ++i;
  }
  st.SetItemsProcessed(st.iterations());
}
BENCHMARK(BM_EditDistanceCell);

static void BM_SampleUniform(benchmark::State& st) {
  const auto spec = st.range(0) == 0 ? SpaceSpec::synthetic_default() : SpaceSpec::nasbench101();
  Rng rng(3);
  for (auto _ : st) {
    benchmark::DoNotOptimize(sample_uniform(spec, 1000, rng));
  }
  st.SetItemsProcessed(st.iterations() * 1000);
}
BENCHMARK(BM_SampleUniform)->Arg(0)->Arg(1)->ArgNames({"cell"});

static void BM_MutateOnce(benchmark::State& st) {
  const auto spec = SpaceSpec::nasbench101();
  Rng rng(4);
  Architecture a = *std::find_if(cells().begin(), cells().end(),
                                 [&](const Architecture& c) { return has_legal_move(c, spec); });
  for (auto _ : st) {
    a = mutate_once(a, spec, rng);
    benchmark::DoNotOptimize(a);
  }
  st.SetItemsProcessed(st.iterations());
}
BENCHMARK(BM_MutateOnce);

static void BM_LissnasSyntheticDefault(benchmark::State& st) {
  set_thread_count(static_cast<unsigned>(st.range(0)));
  const auto spec = SpaceSpec::synthetic_default();
  const auto oracle = BenchmarkOracle::synthetic(spec, {});
  const OracleLookupPredictor predictor(oracle);
  std::uint64_t seed = 0;
  for (auto _ : st) {
    Rng rng(seed++);
    benchmark::DoNotOptimize(lissnas::lissnas(spec, predictor, ShrinkConfig{}, rng));
  }
  set_thread_count(1);
}
BENCHMARK(BM_LissnasSyntheticDefault)->Arg(1)->Arg(4)->ArgNames({"threads"})->Unit(benchmark::kMillisecond);

static void BM_KsTwoSample(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  std::vector<double> a(n), b(n);
  for (auto& x : a) x = u(rng);
  for (auto& x : b) x = u(rng);
  for (auto _ : st) {
    benchmark::DoNotOptimize(ks_two_sample(Edf(a), Edf(b)));
  }
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_KsTwoSample)->RangeMultiplier(10)->Range(100, 100'000)->Complexity();

BENCHMARK_MAIN();
