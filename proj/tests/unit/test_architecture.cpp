#include <gtest/gtest.h>

#include <map>
#include <set>

#include "lissnas/architecture.hpp"
#include "lissnas/error.hpp"
#include "lissnas/spaces.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

using namespace lissnas;

namespace {

SpaceSpec small_cells(int nodes = 5, int edges = 9) {
  CellDims d;
  d.max_nodes = nodes;
  d.max_edges = edges;
  d.ops = {"input", "conv3x3", "conv1x1", "maxpool3x3", "output"};
  d.input_op = OpCode{0};
  d.output_op = OpCode{4};
  return SpaceSpec::cell(d);
}

std::vector<OpCode> ops(std::initializer_list<int> codes) {
  std::vector<OpCode> out;
  for (int c : codes) out.push_back(OpCode{static_cast<std::uint16_t>(c)});
  return out;
}

BlockArchitecture block(std::initializer_list<int> codes) { return BlockArchitecture{ops(codes)}; }

const CellArchitecture& cell_of(const Architecture& a) { return std::get<CellArchitecture>(a); }

oracle::Cell to_oracle(const CellArchitecture& c) {
  oracle::Cell o;
  o.n = c.num_nodes();
  o.adj.assign(static_cast<std::size_t>(o.n), std::vector<int>(static_cast<std::size_t>(o.n), 0));
  for (int i = 0; i < o.n; ++i) {
    o.ops.push_back(c.op(i).value);
    for (int j = i + 1; j < o.n; ++j) o.adj[i][j] = c.has_edge(i, j);
  }
  return o;
}

// Same graph under a random topological relabelling of its intermediate nodes.
CellArchitecture random_relabel(const CellArchitecture& c, Rng& rng) {
  const int n = c.num_nodes();
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) indeg[j] += c.has_edge(i, j);
  std::vector<int> order{0};
  std::vector<bool> placed(static_cast<std::size_t>(n), false);
  placed[0] = true;
  for (int j = 1; j < n; ++j) indeg[j] -= c.has_edge(0, j);
  while (static_cast<int>(order.size()) < n - 1) {
    std::vector<int> ready;
    for (int i = 1; i < n - 1; ++i)
      if (!placed[i] && indeg[i] == 0) ready.push_back(i);
    std::uniform_int_distribution<std::size_t> pick(0, ready.size() - 1);
    const int x = ready[pick(rng)];
    placed[x] = true;
    order.push_back(x);
    for (int j = 0; j < n; ++j)
      if (x < j && c.has_edge(x, j)) --indeg[j];
  }
  order.push_back(n - 1);
  std::vector<int> pos(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) pos[order[k]] = k;
  std::vector<OpCode> o(static_cast<std::size_t>(n));
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) {
    o[pos[i]] = c.op(i);
    for (int j = i + 1; j < n; ++j)
      if (c.has_edge(i, j)) e.emplace_back(pos[i], pos[j]);
  }
  return CellArchitecture::from_edges(o, e);
}

}  // namespace

// --- canonical keys ---------------------------------------------------------

TEST(CanonicalKey, SwappingIntermediateNodesKeepsKey) {
  const auto a = CellArchitecture::from_edges(ops({0, 1, 2, 3, 4}), {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}});
  const auto b = CellArchitecture::from_edges(ops({0, 2, 1, 3, 4}), {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}});
  EXPECT_EQ(canonical_key(a), canonical_key(b));
}

TEST(CanonicalKey, OpChangeGivesDifferentKey) {
  const auto a = CellArchitecture::from_edges(ops({0, 1, 2, 3, 4}), {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
  const auto b = a.with_op(1, OpCode{2});
  EXPECT_NE(canonical_key(a), canonical_key(b));
  // exhaustive relabelling check agrees
  EXPECT_NE(oracle::canonical(to_oracle(a)), oracle::canonical(to_oracle(b)));
}

TEST(CanonicalKey, BlockVectorsHashVerbatim) {
  EXPECT_EQ(canonical_key(block({0, 1, 2, 3})), canonical_key(block({0, 1, 2, 3})));
  EXPECT_NE(canonical_key(block({0, 1, 2, 3})), canonical_key(block({0, 1, 3, 2})));
}

TEST(CanonicalKey, FixedLengthWithinSpace) {
  const auto spec = small_cells();
  Rng rng(3);
  std::set<std::size_t> lengths;
  for (const auto& a : sample_uniform(spec, 500, rng)) lengths.insert(canonical_key(a).value.size());
  EXPECT_EQ(lengths.size(), 1U);
}

TEST(CanonicalKey, InvariantUnderRandomRelabelling) {
  const auto spec = SpaceSpec::nasbench101();
  Rng rng(11);
  const auto cells = sample_uniform(spec, 100, rng);
  for (const auto& a : cells) {
    const auto key = canonical_key(a);
    for (int r = 0; r < 10; ++r) {
      const auto b = random_relabel(cell_of(a), rng);
      ASSERT_EQ(canonical_key(b), key) << to_text(a) << " vs " << to_text(b);
    }
  }
}

TEST(CanonicalKey, EqualExactlyWhenOracleSaysIsomorphic) {
  const auto spec = small_cells(5, 6);
  Rng rng(5);
  const auto cells = sample_uniform(spec, 600, rng);
  int equal = 0;
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    const auto& a = cell_of(cells[i]);
    const auto& b = cell_of(cells[i + 1]);
    const bool same = canonical_key(a) == canonical_key(b);
    const bool iso = a.num_nodes() == b.num_nodes() &&
                     oracle::canonical(to_oracle(a)) == oracle::canonical(to_oracle(b));
    ASSERT_EQ(same, iso) << to_text(a) << " vs " << to_text(b);
    equal += same;
  }
  EXPECT_GT(equal, 0);  // the small space guarantees some collisions
}

TEST(CanonicalKey, DeadNodesArePruned) {
  // node 2 has no path to the output
  const auto raw = CellArchitecture::from_edges(ops({0, 1, 2, 4}), {{0, 1}, {1, 3}, {0, 2}});
  const auto pruned = prune(raw);
  ASSERT_TRUE(pruned);
  EXPECT_EQ(pruned->num_nodes(), 3);
  EXPECT_EQ(canonical_key(raw), canonical_key(*pruned));
  EXPECT_FALSE(all_nodes_live(raw));
  EXPECT_TRUE(all_nodes_live(*pruned));
}

TEST(CanonicalKey, UnreachableOutputPrunesToNothing) {
  const auto raw = CellArchitecture::from_edges(ops({0, 1, 4}), {{0, 1}});
  EXPECT_FALSE(prune(raw));
  EXPECT_FALSE(is_valid(raw, small_cells()));
  EXPECT_THROW(validate(raw, small_cells()), Error);
}

TEST(CellArchitecture, RejectsLowerTriangularEdges) {
  EXPECT_THROW(CellArchitecture::from_edges(ops({0, 1, 4}), {{2, 1}}), Error);
  EXPECT_THROW(CellArchitecture(3, 1, ops({0, 1})), Error);
}

// --- edit distance ------------------------------------------------------------

TEST(EditDistance, BlockHammingExample) {
  const auto spec = SpaceSpec::block_uniform(3, 4);
  EXPECT_EQ(edit_distance(block({0, 1, 2}), block({0, 1, 3}), spec), 1);
  EXPECT_EQ(edit_distance(block({0, 1, 2}), block({0, 1, 2}), spec), 0);
  EXPECT_EQ(edit_distance(block({0, 1, 2}), block({3, 2, 1}), spec), 3);
}

TEST(EditDistance, CellEdgeRemovalAndOpChangeAreOneStep) {
  const auto spec = small_cells();
  const auto original =
      CellArchitecture::from_edges(ops({0, 1, 2, 3, 4}), {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}, {1, 4}});
  const auto edge_removed = original.with_edge_flipped(1, 4);
  const auto op_changed = original.with_op(2, OpCode{3});
  EXPECT_EQ(edit_distance(original, edge_removed, spec), 1);
  EXPECT_EQ(edit_distance(original, op_changed, spec), 1);
  EXPECT_EQ(edit_distance(original, original, spec), 0);
}

TEST(EditDistance, ZeroForIsomorphs) {
  const auto spec = small_cells();
  Rng rng(8);
  for (const auto& a : sample_uniform(spec, 50, rng)) {
    EXPECT_EQ(edit_distance(a, random_relabel(cell_of(a), rng), spec), 0);
  }
}

TEST(EditDistance, BlockMetricProperties) {
  const auto spec = SpaceSpec::block_uniform(6, 3);
  Rng rng(1);
  const auto xs = sample_uniform(spec, 3000, rng);
  for (std::size_t i = 0; i + 2 < xs.size(); i += 3) {
    const auto &a = xs[i], &b = xs[i + 1], &c = xs[i + 2];
    const int ab = edit_distance(a, b, spec), ba = edit_distance(b, a, spec);
    EXPECT_EQ(ab, ba);
    EXPECT_EQ(ab == 0, a == b);
    EXPECT_LE(edit_distance(a, c, spec), ab + edit_distance(b, c, spec));
  }
}

TEST(EditDistance, CellSymmetricAndZeroIffSameKey) {
  const auto spec = small_cells(5, 6);
  Rng rng(2);
  const auto xs = sample_uniform(spec, 400, rng);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const int d = edit_distance(xs[i], xs[i + 1], spec);
    EXPECT_EQ(d, edit_distance(xs[i + 1], xs[i], spec));
    EXPECT_EQ(d == 0, canonical_key(xs[i]) == canonical_key(xs[i + 1]));
  }
}

TEST(EditDistance, MatchesBreadthFirstSearchOnSmallCells) {
  const auto spec = small_cells(4, 6);
  Rng rng(21);
  const auto xs = sample_uniform(spec, 400, rng);
  std::map<int, std::vector<CellArchitecture>> by_size;
  for (const auto& a : xs) by_size[cell_of(a).num_nodes()].push_back(cell_of(a));
  int checked = 0;
  for (auto& [n, group] : by_size) {
    for (std::size_t i = 0; i + 1 < group.size() && checked < 60; i += 2, ++checked) {
      const int bfs = oracle::bfs_distance(to_oracle(group[i]), to_oracle(group[i + 1]), 6, {1, 2, 3});
      ASSERT_EQ(edit_distance(group[i], group[i + 1], spec), bfs)
          << to_text(group[i]) << " vs " << to_text(group[i + 1]);
    }
  }
  EXPECT_GE(checked, 50);
}

TEST(EditDistance, RejectsOversizedCells) {
  const auto spec = SpaceSpec::nasbench101();
  const auto big = CellArchitecture::from_edges(ops({0, 1, 2, 3, 1, 2, 4}),
                                                {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}});
  EXPECT_ERROR_KIND(edit_distance(big, big, spec), ErrorKind::TooLarge);
}

TEST(EditDistance, RejectsKindMismatch) {
  EXPECT_ERROR_KIND(edit_distance(block({0}), block({1}), small_cells()), ErrorKind::SpaceMismatch);
}

// --- mutation -------------------------------------------------------------------

TEST(MutateOnce, BlockMovesAreUniform) {
  const auto spec = SpaceSpec::block_uniform(3, 2);
  Rng rng(99);
  std::map<std::string, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) counts[to_text(mutate_once(block({0, 0, 0}), spec, rng))]++;
  ASSERT_EQ(counts.size(), 3U);
  for (const auto& text : {"1,0,0", "0,1,0", "0,0,1"}) {
    EXPECT_NEAR(counts[text] / static_cast<double>(draws), 1.0 / 3.0, 0.01) << text;
  }
}

TEST(MutateOnce, NoEdgeAdditionsAtEdgeBudget) {
  const auto spec = small_cells(5, 5);
  const auto full =
      CellArchitecture::from_edges(ops({0, 1, 2, 3, 4}), {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
  ASSERT_EQ(full.edge_count(), 5);
  for (const auto& m : legal_moves(full, spec)) {
    if (m.type == ChangeType::edge) {
      ASSERT_TRUE(m.target < m.value && full.has_edge(m.target, m.value));
    }
  }
}

TEST(MutateOnce, EdgeAdditionAgainstLabellingReencodes) {
  const auto spec = small_cells(4, 6);
  // 0->1->3, 0->2->3: adding 2->1 needs the intermediates swapped
  const auto c = CellArchitecture::from_edges(ops({0, 1, 2, 4}), {{0, 1}, {1, 3}, {0, 2}, {2, 3}});
  const auto moves = legal_moves(c, spec, MoveWeights::only(ChangeType::edge));
  const auto it = std::find_if(moves.begin(), moves.end(), [](const Move& m) { return m.target == 2 && m.value == 1; });
  ASSERT_NE(it, moves.end());
  const auto next = apply_move(c, *it);
  EXPECT_TRUE(is_valid(next, spec));
  EXPECT_EQ(cell_of(next).edge_count(), 5);
  EXPECT_EQ(cell_of(next).op(1), OpCode{2});
  EXPECT_TRUE(cell_of(next).has_edge(1, 2));
  EXPECT_EQ(edit_distance(c, next, spec), 1);
}

TEST(MutateOnce, ResultIsOneChangeAway) {
  for (const auto& spec : {SpaceSpec::block_uniform(8, 4), small_cells(), small_cells(6, 8)}) {
    Rng rng(4);
    for (const auto& a : sample_uniform(spec, 1000, rng)) {
      if (!has_legal_move(a, spec)) {
        EXPECT_ERROR_KIND(mutate_once(a, spec, rng), ErrorKind::NoLegalMove);
        continue;
      }
      const auto b = mutate_once(a, spec, rng);
      ASSERT_TRUE(is_valid(b, spec));
      ASSERT_EQ(edit_distance(a, b, spec), 1) << to_text(a) << " -> " << to_text(b);
    }
  }
}

TEST(MutateOnce, OpOnlyAndEdgeOnlyFilters) {
  const auto spec = small_cells();
  Rng rng(6);
  for (const auto& a : sample_uniform(spec, 200, rng)) {
    if (cell_of(a).num_nodes() == 2) continue;
    const auto b = cell_of(mutate_once(a, spec, rng, MoveWeights::only(ChangeType::op)));
    EXPECT_EQ(b.edge_bits(), cell_of(a).edge_bits());
    const auto c = cell_of(mutate_once(a, spec, rng, MoveWeights::only(ChangeType::edge)));
    EXPECT_NE(c.edge_count(), cell_of(a).edge_count());
  }
}

TEST(MutateOnce, BareInputOutputCellIsIsolated) {
  const auto spec = small_cells();
  const auto bare = CellArchitecture::from_edges(ops({0, 4}), {{0, 1}});
  ASSERT_TRUE(is_valid(bare, spec));
  EXPECT_FALSE(has_legal_move(bare, spec));
  const auto three = CellArchitecture::from_edges(ops({0, 1, 4}), {{0, 1}, {1, 2}});
  EXPECT_TRUE(has_legal_move(three, spec));
}

TEST(MutateOnce, NoLegalMoveInDegenerateSpaces) {
  Rng rng(0);
  EXPECT_ERROR_KIND(mutate_once(block({0, 0}), SpaceSpec::block_uniform(2, 1), rng), ErrorKind::NoLegalMove);
  CellDims d;
  d.max_nodes = 2;
  d.max_edges = 1;
  d.ops = {"input", "conv", "output"};
  d.input_op = OpCode{0};
  d.output_op = OpCode{2};
  const auto spec = SpaceSpec::cell(d);
  // removing the only edge would disconnect the output
  const auto only = CellArchitecture::from_edges(ops({0, 2}), {{0, 1}});
  EXPECT_ERROR_KIND(mutate_once(only, spec, rng), ErrorKind::NoLegalMove);
}

// --- neighbors and walks ------------------------------------------------------------

TEST(GenerateNeighbor, RadiusOneIsExactlyOneChange) {
  const auto spec = small_cells();
  Rng rng(12);
  for (const auto& a : sample_uniform(spec, 300, rng)) {
    if (!has_legal_move(a, spec)) continue;
    EXPECT_EQ(edit_distance(a, generate_neighbor(a, 1, spec, rng), spec), 1);
  }
}

TEST(GenerateNeighbor, BlockRadiusThreeStaysWithinRange) {
  const auto spec = SpaceSpec::block_uniform(10, 4);
  Rng rng(13);
  const auto starts = sample_uniform(spec, 100, rng);
  std::set<int> seen;
  for (int i = 0; i < 10000; ++i) {
    const auto& a = starts[static_cast<std::size_t>(i) % starts.size()];
    const int d = edit_distance(a, generate_neighbor(a, 3, spec, rng), spec);
    ASSERT_GE(d, 1);
    ASSERT_LE(d, 3);
    seen.insert(d);
  }
  EXPECT_EQ(seen.size(), 3U);
}

TEST(GenerateNeighbor, CellsStayValidAndNonIsomorphic) {
  const auto spec = small_cells(6, 9);
  Rng rng(14);
  for (const auto& a : sample_uniform(spec, 300, rng)) {
    if (!has_legal_move(a, spec)) continue;
    const auto b = generate_neighbor(a, 5, spec, rng);
    ASSERT_TRUE(is_valid(b, spec));
    const int d = edit_distance(a, b, spec);
    ASSERT_GE(d, 1);
    ASSERT_LE(d, 6);  // up to five changes plus the anti-isomorph nudge
  }
}

TEST(GenerateNeighbor, SameSeedSameOutput) {
  const auto spec = SpaceSpec::shufflenet_v2();
  Rng r0(77);
  const auto a = sample_uniform(spec, 1, r0).front();
  Rng r1(5), r2(5);
  EXPECT_EQ(generate_neighbor(a, 7, spec, r1), generate_neighbor(a, 7, spec, r2));
}

TEST(GenerateNeighbor, RejectsOutOfRangeRadius) {
  const auto spec = SpaceSpec::block_uniform(4, 3);
  Rng rng(1);
  EXPECT_THROW(generate_neighbor(block({0, 0, 0, 0}), 0, spec, rng), Error);
  EXPECT_THROW(generate_neighbor(block({0, 0, 0, 0}), 5, spec, rng), Error);
}

TEST(WalkChanges, NeverStepsStraightBack) {
  // one layer with two choices: the only move from b is back to a
  const auto spec = SpaceSpec::block_uniform(1, 2);
  Rng rng(3);
  const auto out = walk_changes(block({0}), 5, spec, rng);
  EXPECT_EQ(out, Architecture(block({1})));
}

TEST(RandomWalk, ShapeAndSteps) {
  const auto spec = small_cells();
  Rng rng(15);
  const auto start = sample_uniform(spec, 1, rng).front();
  const auto one = random_walk(start, 1, spec, rng);
  ASSERT_EQ(one.size(), 2U);
  EXPECT_EQ(one.front(), start);
  const auto walk = random_walk(start, 50, spec, rng);
  ASSERT_EQ(walk.size(), 51U);
  for (std::size_t i = 0; i + 1 < walk.size(); ++i) EXPECT_EQ(edit_distance(walk[i], walk[i + 1], spec), 1);
  EXPECT_THROW(random_walk(start, 0, spec, rng), Error);
}

TEST(RandomWalk, Reproducible) {
  const auto spec = SpaceSpec::synthetic_default();
  Rng a(9), b(9);
  const auto s = sample_uniform(spec, 1, a).front();
  sample_uniform(spec, 1, b);
  EXPECT_EQ(random_walk(s, 30, spec, a), random_walk(s, 30, spec, b));
}

// --- total edit distance and text form -------------------------------------------------------

TEST(TotalEditDistance, Examples) {
  EXPECT_EQ(total_edit_distance(SpaceSpec::shufflenet_v2()), 20);
  EXPECT_EQ(total_edit_distance(small_cells(5, 9)), 12);
  EXPECT_EQ(total_edit_distance(SpaceSpec::block_uniform(1, 4)), 1);
  EXPECT_EQ(total_edit_distance(SpaceSpec::nasbench101()), 14);
}

TEST(TextForm, RoundTrips) {
  const auto bspec = SpaceSpec::block_uniform(4, 4);
  EXPECT_EQ(to_text(block({0, 1, 2, 3})), "0,1,2,3");
  EXPECT_EQ(parse_architecture("0,1,2,3", bspec), Architecture(block({0, 1, 2, 3})));
  const auto cspec = small_cells();
  Rng rng(4);
  for (const auto& a : sample_uniform(cspec, 200, rng)) EXPECT_EQ(parse_architecture(to_text(a), cspec), a);
  const auto c = CellArchitecture::from_edges(ops({0, 1, 4}), {{0, 1}, {1, 2}});
  EXPECT_EQ(to_text(c), "101|0,1,4");
}

TEST(TextForm, RejectsMalformedInput) {
  const auto bspec = SpaceSpec::block_uniform(4, 4);
  // well-formed text, invalid architecture
  EXPECT_FALSE(is_valid(parse_architecture("0,1,2", bspec), bspec));
  EXPECT_FALSE(is_valid(parse_architecture("0,1,2,9", bspec), bspec));
  EXPECT_THROW(parse_architecture("0,x,2,1", bspec), Error);
  const auto cspec = small_cells();
  EXPECT_THROW(parse_architecture("10|0,1,4", cspec), Error);
  EXPECT_THROW(parse_architecture("101", cspec), Error);
  EXPECT_FALSE(prune(cell_of(parse_architecture("100|0,1,4", cspec))));  // output unreachable
}
