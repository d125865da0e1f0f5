#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "expect_error.hpp"
#include "lissnas/csv.hpp"
#include "lissnas/parallel.hpp"
#include "lissnas/spaces.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace lissnas;

namespace {

SpaceSpec small_cells(int nodes, int edges) {
  CellDims d;
  d.max_nodes = nodes;
  d.max_edges = edges;
  d.ops = {"input", "conv3x3", "conv1x1", "maxpool3x3", "output"};
  d.input_op = OpCode{0};
  d.output_op = OpCode{4};
  return SpaceSpec::cell(d);
}

std::size_t block_index(const Architecture& a, int choices) {
  std::size_t idx = 0;
  for (auto c : std::get<BlockArchitecture>(a).choices) idx = idx * static_cast<std::size_t>(choices) + c.value;
  return idx;
}

// Upper 0.999 quantile of chi-square(k), Wilson-Hilferty approximation.
double chi2_critical_999(double k) {
  const double z = 3.090232306167813;
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - a + z * std::sqrt(a), 3);
}

}  // namespace

TEST(SampleUniform, TwoByTwoFrequencies) {
  const auto spec = SpaceSpec::block_uniform(2, 2);
  Rng rng(2024);
  std::map<std::size_t, int> counts;
  for (const auto& a : sample_uniform(spec, 4000, rng)) counts[block_index(a, 2)]++;
  ASSERT_EQ(counts.size(), 4U);
  for (const auto& [idx, c] : counts) EXPECT_NEAR(c / 4000.0, 0.25, 0.02) << idx;
}

TEST(SampleUniform, SingleDrawIsValid) {
  for (const auto& spec : {SpaceSpec::shufflenet_v2(), SpaceSpec::nasbench101()}) {
    Rng rng(1);
    const auto one = sample_uniform(spec, 1, rng);
    ASSERT_EQ(one.size(), 1U);
    EXPECT_TRUE(is_valid(one.front(), spec));
  }
}

TEST(SampleUniform, FixedSeedSameList) {
  const auto spec = SpaceSpec::nasbench101();
  Rng a(17), b(17);
  EXPECT_EQ(sample_uniform(spec, 3000, a), sample_uniform(spec, 3000, b));
}

TEST(SampleUniform, IndependentOfThreadCount) {
  const auto spec = SpaceSpec::nasbench101();
  const unsigned before = thread_count();
  set_thread_count(1);
  Rng a(5);
  const auto one = sample_uniform(spec, 5000, a);
  set_thread_count(4);
  Rng b(5);
  const auto four = sample_uniform(spec, 5000, b);
  set_thread_count(before);
  EXPECT_EQ(one, four);
}

TEST(SampleUniform, ZeroIsRejected) {
  Rng rng(0);
  EXPECT_ERROR_KIND(sample_uniform(SpaceSpec::block_uniform(2, 2), 0, rng), ErrorKind::InvalidArgument);
}

TEST(SampleUniform, CellsAreValidAndPruned) {
  const auto spec = SpaceSpec::nasbench101();
  Rng rng(3);
  for (const auto& a : sample_uniform(spec, 2000, rng)) {
    ASSERT_TRUE(is_valid(a, spec));
    const auto& c = std::get<CellArchitecture>(a);
    ASSERT_TRUE(all_nodes_live(c));
    ASSERT_LE(c.edge_count(), 9);
  }
}

TEST(SampleUniform, GoodnessOfFitOnEnumerableSpace) {
  const auto spec = SpaceSpec::block_uniform(6, 4);  // 4096 members
  const std::size_t members = 4096, draws = 1'000'000;
  Rng rng(42);
  std::vector<double> counts(members, 0.0);
  for (const auto& a : sample_uniform(spec, draws, rng)) counts[block_index(a, 4)] += 1.0;
  const double expected = static_cast<double>(draws) / static_cast<double>(members);
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, chi2_critical_999(static_cast<double>(members - 1)));
}

TEST(RawCardinality, BlockExamples) {
  const auto card = raw_cardinality(SpaceSpec::block_uniform(20, 4));
  EXPECT_EQ(card.raw, std::pow(4.0L, 20));
  EXPECT_EQ(card.deduplicated, card.raw);
  EXPECT_EQ(raw_cardinality(SpaceSpec::block_uniform(1, 1)).raw, 1.0L);
  EXPECT_EQ(raw_cardinality(SpaceSpec::block(BlockDims{{2, 3, 5}})).raw, 30.0L);
}

TEST(RawCardinality, CellCountsMatchExhaustiveEnumeration) {
  for (auto [nodes, edges] : {std::pair{4, 5}, std::pair{5, 6}, std::pair{5, 9}}) {
    const auto spec = small_cells(nodes, edges);
    const int slots = nodes * (nodes - 1) / 2;
    const std::vector<int> inner{1, 2, 3};
    std::size_t labels = 1;
    for (int i = 0; i < nodes - 2; ++i) labels *= inner.size();

    std::size_t raw = 0;
    std::set<std::string> classes;
    for (std::uint64_t mask = 0; mask < (1ULL << slots); ++mask) {
      if (__builtin_popcountll(mask) > edges) continue;
      for (std::size_t l = 0; l < labels; ++l) {
        ++raw;
        oracle::Cell c;
        c.n = nodes;
        c.adj.assign(static_cast<std::size_t>(nodes), std::vector<int>(static_cast<std::size_t>(nodes), 0));
        int b = 0;
        for (int i = 0; i < nodes; ++i)
          for (int j = i + 1; j < nodes; ++j, ++b) c.adj[i][j] = (mask >> b) & 1U;
        c.ops.assign(static_cast<std::size_t>(nodes), 0);
        c.ops.back() = 4;
        std::size_t rest = l;
        for (int i = 1; i + 1 < nodes; ++i) {
          c.ops[i] = inner[rest % inner.size()];
          rest /= inner.size();
        }
        const auto p = oracle::prune(c);
        if (p.n == 0) continue;
        classes.insert(oracle::canonical(p));
      }
    }
    const auto card = raw_cardinality(spec, 1'000'000);
    EXPECT_EQ(card.raw, static_cast<long double>(raw)) << nodes << "/" << edges;
    EXPECT_TRUE(card.deduplicated_exact);
    EXPECT_NEAR(static_cast<double>(card.deduplicated), static_cast<double>(classes.size()), 1e-6)
        << nodes << "/" << edges;
  }
}

TEST(RawCardinality, EstimateCloseToExactCount) {
  const auto spec = small_cells(5, 9);
  const auto exact = raw_cardinality(spec, 1'000'000);
  const auto estimate = raw_cardinality(spec, 2'000, 7);
  ASSERT_FALSE(estimate.deduplicated_exact);
  EXPECT_NEAR(static_cast<double>(estimate.deduplicated / exact.deduplicated), 1.0, 0.05);
}

// --- snapshots ----------------------------------------------------------------

TEST(Snapshot, IsomorphicCellsCollapse) {
  std::vector<OpCode> o1{OpCode{0}, OpCode{1}, OpCode{2}, OpCode{4}};
  std::vector<OpCode> o2{OpCode{0}, OpCode{2}, OpCode{1}, OpCode{4}};
  const std::vector<std::pair<int, int>> e{{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  const std::vector<Architecture> archs{CellArchitecture::from_edges(o1, e), CellArchitecture::from_edges(o2, e)};
  const auto snap = snapshot_from(archs, {0.9, 0.7});
  EXPECT_EQ(snap.size(), 1U);
  EXPECT_DOUBLE_EQ(snap.mean_pred_acc(), 0.9);  // first occurrence kept
}

TEST(Snapshot, MeanOfDistinctMembers) {
  const std::vector<Architecture> archs{BlockArchitecture{{OpCode{0}}}, BlockArchitecture{{OpCode{1}}}};
  const auto snap = snapshot_from(archs, {0.9, 0.7});
  EXPECT_EQ(snap.size(), 2U);
  EXPECT_NEAR(snap.mean_pred_acc(), 0.8, 1e-15);
  EXPECT_TRUE(snap.contains(canonical_key(archs[1])));
  EXPECT_FALSE(snap.contains(canonical_key(BlockArchitecture{{OpCode{2}}})));
}

TEST(Snapshot, Errors) {
  EXPECT_ERROR_KIND(snapshot_from({}, {}), ErrorKind::EmptySnapshot);
  EXPECT_ERROR_KIND(snapshot_from({BlockArchitecture{{OpCode{0}}}}, {0.5, 0.6}), ErrorKind::LengthMismatch);
}

TEST(Snapshot, IsomorphismFreeAndMeanRecomputable) {
  const auto spec = small_cells(5, 6);
  Rng rng(8);
  const auto archs = sample_uniform(spec, 3000, rng);
  std::vector<double> preds;
  std::uniform_real_distribution<double> u(0.5, 1.0);
  for (std::size_t i = 0; i < archs.size(); ++i) preds.push_back(u(rng));
  const auto snap = snapshot_from(archs, preds);
  EXPECT_LT(snap.size(), archs.size());  // small space: duplicates guaranteed
  std::set<std::string> keys;
  double sum = 0.0;
  for (const auto& m : snap.members()) {
    EXPECT_TRUE(keys.insert(m.key.value).second);
    EXPECT_EQ(m.key, canonical_key(m.arch));
    sum += m.predicted;
  }
  EXPECT_NEAR(snap.mean_pred_acc(), sum / static_cast<double>(snap.size()), 1e-12);
}

TEST(Snapshot, CsvRoundTrip) {
  const auto spec = SpaceSpec::nasbench101();
  Rng rng(4);
  const auto archs = sample_uniform(spec, 200, rng);
  std::vector<double> preds;
  for (std::size_t i = 0; i < archs.size(); ++i) preds.push_back(0.5 + 0.001 * static_cast<double>(i) + 1e-13);
  const auto snap = snapshot_from(archs, preds);
  TempDir dir;
  save_snapshot(snap, dir.file("snap.csv"));
  const auto back = load_snapshot(dir.file("snap.csv"), spec);
  ASSERT_EQ(back.size(), snap.size());
  for (std::size_t i = 0; i < snap.size(); ++i) {
    EXPECT_EQ(back.members()[i].key, snap.members()[i].key);
    EXPECT_EQ(back.members()[i].arch, snap.members()[i].arch);
    EXPECT_EQ(back.members()[i].predicted, snap.members()[i].predicted);
  }
  EXPECT_EQ(back.mean_pred_acc(), snap.mean_pred_acc());
}

TEST(Snapshot, LoadRejectsTamperedKey) {
  TempDir dir;
  csv::write_file(dir.file("bad.csv"), "canonical_key,architecture_text,predicted_acc\nzz,\"0,1\",0.5\n");
  EXPECT_ERROR_KIND(load_snapshot(dir.file("bad.csv"), SpaceSpec::block_uniform(2, 2)), ErrorKind::ParseError);
}

TEST(EnumerateBlockSpace, LexicographicAndComplete) {
  const auto all = enumerate_block_space(SpaceSpec::block(BlockDims{{2, 3}}));
  ASSERT_EQ(all.size(), 6U);
  EXPECT_EQ(to_text(all.front()), "0,0");
  EXPECT_EQ(to_text(all[1]), "0,1");
  EXPECT_EQ(to_text(all.back()), "1,2");
  EXPECT_ERROR_KIND(enumerate_block_space(SpaceSpec::shufflenet_v2()), ErrorKind::TooLarge);
}

TEST(SpaceSpecJson, RoundTrip) {
  for (const auto& spec : {SpaceSpec::shufflenet_v2(), SpaceSpec::nasbench101(), small_cells(5, 9)}) {
    EXPECT_EQ(spec_from_json(spec_to_json(spec)), spec);
  }
  EXPECT_ERROR_KIND(spec_from_json("{\"kind\":\"mesh\"}"), ErrorKind::ParseError);
  EXPECT_ERROR_KIND(spec_from_json("not json"), ErrorKind::ParseError);
}

TEST(SpaceSpecInvariants, RejectDegenerateDimensions) {
  EXPECT_ERROR_KIND(SpaceSpec::block_uniform(0, 4), ErrorKind::InvalidArgument);
  EXPECT_ERROR_KIND(SpaceSpec::block(BlockDims{{2, 0}}), ErrorKind::InvalidArgument);
  CellDims d;
  d.max_nodes = 1;
  d.ops = {"input", "a", "output"};
  d.output_op = OpCode{2};
  EXPECT_ERROR_KIND(SpaceSpec::cell(d), ErrorKind::InvalidArgument);
  d.max_nodes = 4;
  d.max_edges = 0;
  EXPECT_ERROR_KIND(SpaceSpec::cell(d), ErrorKind::InvalidArgument);
}
