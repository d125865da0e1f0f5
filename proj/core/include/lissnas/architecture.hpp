#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lissnas/random.hpp"
#include "lissnas/space_spec.hpp"

namespace lissnas {

/// DAG cell with labeled nodes. Node 0 is INPUT, node num_nodes-1 is OUTPUT and
/// edges only run from lower to higher node index.
class CellArchitecture {
 public:
  CellArchitecture(int num_nodes, std::uint64_t edge_bits, std::vector<OpCode> ops);

  /// Builds from a row-major adjacency list of (from, to) pairs.
  static CellArchitecture from_edges(std::vector<OpCode> ops,
                                     const std::vector<std::pair<int, int>>& edges);

  int num_nodes() const noexcept { return num_nodes_; }
  std::uint64_t edge_bits() const noexcept { return edges_; }
  bool has_edge(int from, int to) const noexcept { return (edges_ >> bit(from, to)) & 1U; }
  int edge_count() const noexcept;
  std::span<const OpCode> ops() const noexcept { return ops_; }
  OpCode op(int node) const { return ops_.at(static_cast<std::size_t>(node)); }

  CellArchitecture with_edge_flipped(int from, int to) const;
  CellArchitecture with_op(int node, OpCode op) const;

  static constexpr int bit(int from, int to) noexcept { return from * kMaxCellStorageNodes + to; }

  friend bool operator==(const CellArchitecture&, const CellArchitecture&) = default;

 private:
  int num_nodes_;
  std::uint64_t edges_;
  std::vector<OpCode> ops_;
};

/// Fixed-length choice vector, one entry per layer.
struct BlockArchitecture {
  std::vector<OpCode> choices;

  friend bool operator==(const BlockArchitecture&, const BlockArchitecture&) = default;
};

using Architecture = std::variant<CellArchitecture, BlockArchitecture>;

/// Canonical digest: equal iff the architectures are isomorphic after dead-node pruning.
/// Length is fixed within a space.
struct CanonicalKey {
  std::string value;

  friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
};

// --- validity -----------------------------------------------------------

/// Removes nodes not on an INPUT->OUTPUT path. nullopt when OUTPUT is unreachable.
std::optional<CellArchitecture> prune(const CellArchitecture& cell);

/// True when every node lies on an INPUT->OUTPUT path.
bool all_nodes_live(const CellArchitecture& cell);

bool is_valid(const Architecture& arch, const SpaceSpec& spec);
/// Throws SpecViolation with a reason when arch is not valid in spec.
void validate(const Architecture& arch, const SpaceSpec& spec);

// --- identity -----------------------------------------------------------

CanonicalKey canonical_key(const Architecture& arch);

/// Minimum number of atomic changes between a and b. Hamming distance for
/// blocks; for cells, graph edit distance with unit costs minimized over all
/// intermediate-node matchings (exact, cells of at most kMaxEditDistanceNodes).
int edit_distance(const Architecture& a, const Architecture& b, const SpaceSpec& spec);
inline constexpr int kMaxEditDistanceNodes = 6;

/// Number of independently changeable positions; denominator of the neighbor threshold.
int total_edit_distance(const SpaceSpec& spec);

// --- atomic changes -----------------------------------------------------

enum class ChangeType { edge, op };

struct Move {
  ChangeType type;
  int target;   // edge: from-node; op: node (cell) or layer (block)
  int value;    // edge: to-node;   op: new op code
};

/// Relative weight of each change type. Zero disables a type; the default
/// treats every legal change as equally likely.
struct MoveWeights {
  double edge = 1.0;
  double op = 1.0;

  static MoveWeights only(ChangeType type) {
    return type == ChangeType::edge ? MoveWeights{1.0, 0.0} : MoveWeights{0.0, 1.0};
  }
};

std::vector<Move> legal_moves(const Architecture& arch, const SpaceSpec& spec,
                              const MoveWeights& weights = {});
Architecture apply_move(const Architecture& arch, const Move& move);
/// False for architectures isolated under the allowed change types, e.g. the
/// bare INPUT->OUTPUT cell: removing its edge disconnects it and any added edge
/// is pruned away again.
bool has_legal_move(const Architecture& arch, const SpaceSpec& spec, const MoveWeights& weights = {});

Architecture mutate_once(const Architecture& arch, const SpaceSpec& spec, Rng& rng,
                         const MoveWeights& weights = {});

/// Applies d ~ Uniform{1..max_d} atomic changes, never stepping straight back
/// to the previous state. The result is between 1 and d changes from arch.
Architecture generate_neighbor(const Architecture& arch, int max_d, const SpaceSpec& spec,
                               Rng& rng, const MoveWeights& weights = {});

/// Exactly `changes` sequential atomic changes with the same backtracking rule.
Architecture walk_changes(const Architecture& arch, int changes, const SpaceSpec& spec,
                          Rng& rng, const MoveWeights& weights = {});

/// steps+1 architectures starting at arch, consecutive entries one change apart.
std::vector<Architecture> random_walk(const Architecture& arch, int steps, const SpaceSpec& spec,
                                      Rng& rng);

// --- text form ----------------------------------------------------------

/// Block: "0,1,2,3". Cell: upper-triangle bits row-major, '|', comma-separated op codes.
std::string to_text(const Architecture& arch);
Architecture parse_architecture(const std::string& text, const SpaceSpec& spec);

}  // namespace lissnas
