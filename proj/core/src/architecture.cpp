#include "lissnas/architecture.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <bit>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "lissnas/error.hpp"

namespace lissnas {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

constexpr std::uint16_t kAbsentOp = 0xFFFF;

std::uint64_t upper_mask(int n) {
  std::uint64_t mask = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) mask |= 1ULL << CellArchitecture::bit(i, j);
  return mask;
}

// Bitmask of nodes reachable from node 0 / nodes that reach node n-1.
std::pair<unsigned, unsigned> reachability(const CellArchitecture& c) {
  const int n = c.num_nodes();
  unsigned fwd = 1U;
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      if (((fwd >> i) & 1U) && c.has_edge(i, j)) {
        fwd |= 1U << j;
        break;
      }
    }
  }
  unsigned bwd = 1U << (n - 1);
  for (int i = n - 2; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) {
      if (((bwd >> j) & 1U) && c.has_edge(i, j)) {
        bwd |= 1U << i;
        break;
      }
    }
  }
  return {fwd, bwd};
}

// Bitmask of nodes reachable from each node (the node itself included).
std::vector<unsigned> descendants(const CellArchitecture& c) {
  const int n = c.num_nodes();
  std::vector<unsigned> reach(static_cast<std::size_t>(n), 0U);
  for (int i = n - 1; i >= 0; --i) {
    unsigned r = 1U << i;
    for (int j = i + 1; j < n; ++j)
      if (c.has_edge(i, j)) r |= reach[static_cast<std::size_t>(j)];
    reach[static_cast<std::size_t>(i)] = r;
  }
  return reach;
}

// Adds u->v (which must keep the graph acyclic) and relabels the nodes in the
// smallest topological order that keeps INPUT first and OUTPUT last.
CellArchitecture with_edge_added(const CellArchitecture& c, int u, int v) {
  const int n = c.num_nodes();
  std::array<std::array<bool, kMaxCellStorageNodes>, kMaxCellStorageNodes> adj{};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c.has_edge(i, j);
  adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = true;

  std::array<int, kMaxCellStorageNodes> indegree{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) indegree[static_cast<std::size_t>(j)] += adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  std::vector<int> order;
  std::array<bool, kMaxCellStorageNodes> placed{};
  while (static_cast<int>(order.size()) < n) {
    int next = -1;
    for (int i = 0; i < n - 1 && next < 0; ++i)
      if (!placed[static_cast<std::size_t>(i)] && indegree[static_cast<std::size_t>(i)] == 0) next = i;
    if (next < 0) next = n - 1;
    if (placed[static_cast<std::size_t>(next)] || indegree[static_cast<std::size_t>(next)] != 0) {
      throw Error(ErrorKind::SpecViolation, "edge addition would create a cycle");
    }
    placed[static_cast<std::size_t>(next)] = true;
    order.push_back(next);
    for (int j = 0; j < n; ++j)
      if (adj[static_cast<std::size_t>(next)][static_cast<std::size_t>(j)]) --indegree[static_cast<std::size_t>(j)];
  }
  std::vector<int> pos(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = k;
  std::vector<OpCode> ops(static_cast<std::size_t>(n));
  std::uint64_t bits = 0;
  for (int i = 0; i < n; ++i) {
    ops[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])] = c.op(i);
    for (int j = 0; j < n; ++j) {
      if (adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
        bits |= 1ULL << CellArchitecture::bit(pos[static_cast<std::size_t>(i)], pos[static_cast<std::size_t>(j)]);
      }
    }
  }
  return CellArchitecture(n, bits, std::move(ops));
}

const CellArchitecture& as_cell(const Architecture& a) { return std::get<CellArchitecture>(a); }
const BlockArchitecture& as_block(const Architecture& a) { return std::get<BlockArchitecture>(a); }

void require_same_kind(const Architecture& arch, const SpaceSpec& spec) {
  const bool cell = std::holds_alternative<CellArchitecture>(arch);
  if (cell != spec.is_cell()) throw Error(ErrorKind::SpaceMismatch, "architecture kind differs from space kind");
}

void hex_byte(std::string& out, unsigned v) {
  static constexpr char digits[] = "0123456789abcdef";
  out.push_back(digits[(v >> 4) & 0xF]);
  out.push_back(digits[v & 0xF]);
}

// Row-major adjacency code with MSB-first ordering, so comparing codes
// numerically compares matrices lexicographically.
struct Encoding {
  std::uint64_t code = 0;
  std::array<std::uint16_t, kMaxCellStorageNodes> ops{};

  friend auto operator<=>(const Encoding&, const Encoding&) = default;
};

Encoding encode_permuted(const CellArchitecture& c, const std::vector<int>& perm) {
  // perm maps old node -> new node
  const int n = c.num_nodes();
  Encoding e;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!c.has_edge(i, j)) continue;
      const int pi = perm[static_cast<std::size_t>(i)];
      const int pj = perm[static_cast<std::size_t>(j)];
      e.code |= 1ULL << (63 - (pi * n + pj));
    }
    e.ops[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = c.op(i).value;
  }
  return e;
}

CanonicalKey cell_key(const CellArchitecture& raw) {
  const auto pruned = prune(raw);
  if (!pruned) return {"C0"};
  const auto& c = *pruned;
  const int n = c.num_nodes();

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Encoding best = encode_permuted(c, perm);
  if (n > 3) {
    while (std::next_permutation(perm.begin() + 1, perm.end() - 1)) {
      best = std::min(best, encode_permuted(c, perm));
    }
  }

  std::string key = "C";
  hex_byte(key, static_cast<unsigned>(n));
  for (int shift = 56; shift >= 0; shift -= 8) hex_byte(key, static_cast<unsigned>(best.code >> shift));
  for (int i = 0; i < kMaxCellStorageNodes; ++i) {
    const unsigned v = i < n ? best.ops[static_cast<std::size_t>(i)] : 0xFFu;
    hex_byte(key, v >> 8);
    hex_byte(key, v);
  }
  return {key};
}

// Full (directed) adjacency and labels padded to m nodes; padding nodes are
// isolated and carry kAbsentOp, the output stays last.
struct Padded {
  std::array<std::array<bool, kMaxCellStorageNodes>, kMaxCellStorageNodes> adj{};
  std::array<std::uint16_t, kMaxCellStorageNodes> ops{};
};

Padded pad(const CellArchitecture& c, int m) {
  const int n = c.num_nodes();
  auto slot = [&](int i) { return i == n - 1 ? m - 1 : i; };
  Padded p;
  p.ops.fill(kAbsentOp);
  for (int i = 0; i < n; ++i) {
    p.ops[static_cast<std::size_t>(slot(i))] = c.op(i).value;
    for (int j = i + 1; j < n; ++j) {
      if (c.has_edge(i, j)) p.adj[static_cast<std::size_t>(slot(i))][static_cast<std::size_t>(slot(j))] = true;
    }
  }
  return p;
}

int cell_distance(const CellArchitecture& a, const CellArchitecture& b) {
  const int m = std::max(a.num_nodes(), b.num_nodes());
  if (m > kMaxEditDistanceNodes) {
    throw Error(ErrorKind::TooLarge, "exact cell edit distance supports at most " +
                                         std::to_string(kMaxEditDistanceNodes) + " nodes");
  }
  const Padded pa = pad(a, m);
  const Padded pb = pad(b, m);
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  int best = std::numeric_limits<int>::max();
  do {
    int cost = 0;
    for (int i = 0; i < m; ++i) {
      const auto pi = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
      if (pa.ops[static_cast<std::size_t>(i)] != pb.ops[pi]) ++cost;
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        const auto pj = static_cast<std::size_t>(perm[static_cast<std::size_t>(j)]);
        if (pa.adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != pb.adj[pi][pj]) ++cost;
      }
    }
    best = std::min(best, cost);
  } while (m > 3 && std::next_permutation(perm.begin() + 1, perm.end() - 1));
  return best;
}

// Cheap necessary condition for isomorphism.
bool maybe_isomorphic(const CellArchitecture& a, const CellArchitecture& b) {
  if (a.num_nodes() != b.num_nodes() || a.edge_count() != b.edge_count()) return false;
  std::vector<OpCode> oa(a.ops().begin(), a.ops().end());
  std::vector<OpCode> ob(b.ops().begin(), b.ops().end());
  std::sort(oa.begin(), oa.end());
  std::sort(ob.begin(), ob.end());
  return oa == ob;
}

bool same_state(const Architecture& x, const Architecture& y) {
  if (x == y) return true;
  if (!std::holds_alternative<CellArchitecture>(x)) return false;
  const auto& cx = as_cell(x);
  const auto& cy = as_cell(y);
  return maybe_isomorphic(cx, cy) && canonical_key(x) == canonical_key(y);
}

double move_weight(const Move& m, const MoveWeights& w) {
  return m.type == ChangeType::edge ? w.edge : w.op;
}

// Picks one move index; uniform when all weights match, else proportional.
std::size_t pick(const std::vector<Move>& moves, const std::vector<bool>& excluded,
                 const MoveWeights& w, Rng& rng) {
  std::vector<double> weights(moves.size());
  for (std::size_t i = 0; i < moves.size(); ++i) weights[i] = excluded[i] ? 0.0 : move_weight(moves[i], w);
  const double top = *std::max_element(weights.begin(), weights.end());
  const bool uniform =
      std::all_of(weights.begin(), weights.end(), [top](double x) { return x == 0.0 || x == top; });
  if (uniform) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (weights[i] > 0.0) open.push_back(i);
    std::uniform_int_distribution<std::size_t> dist(0, open.size() - 1);
    return open[dist(rng)];
  }
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  return dist(rng);
}

Architecture step_avoiding(const Architecture& cur, const Architecture* previous, const SpaceSpec& spec,
                           Rng& rng, const MoveWeights& weights, bool& stuck) {
  const auto moves = legal_moves(cur, spec, weights);
  if (moves.empty()) throw Error(ErrorKind::NoLegalMove, "no legal atomic change from " + to_text(cur));
  std::vector<bool> excluded(moves.size(), false);
  std::size_t remaining = moves.size();
  while (remaining > 0) {
    const std::size_t i = pick(moves, excluded, weights, rng);
    Architecture next = apply_move(cur, moves[i]);
    if (previous == nullptr || !same_state(next, *previous)) return next;
    excluded[i] = true;
    --remaining;
  }
  stuck = true;
  return cur;
}

}  // namespace

// --- CellArchitecture -----------------------------------------------------

CellArchitecture::CellArchitecture(int num_nodes, std::uint64_t edge_bits, std::vector<OpCode> ops)
    : num_nodes_(num_nodes), edges_(edge_bits), ops_(std::move(ops)) {
  if (num_nodes_ < 2 || num_nodes_ > kMaxCellStorageNodes) {
    throw Error(ErrorKind::SpecViolation, "cell node count out of range");
  }
  if (static_cast<int>(ops_.size()) != num_nodes_) {
    throw Error(ErrorKind::SpecViolation, "cell op list length differs from node count");
  }
  if ((edges_ & ~upper_mask(num_nodes_)) != 0) {
    throw Error(ErrorKind::SpecViolation, "cell adjacency must be strictly upper triangular");
  }
}

CellArchitecture CellArchitecture::from_edges(std::vector<OpCode> ops,
                                              const std::vector<std::pair<int, int>>& edges) {
  std::uint64_t bits = 0;
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= kMaxCellStorageNodes || j >= kMaxCellStorageNodes) {
      throw Error(ErrorKind::SpecViolation, "edge endpoint out of range");
    }
    bits |= 1ULL << bit(i, j);
  }
  const int n = static_cast<int>(ops.size());
  return CellArchitecture(n, bits, std::move(ops));
}

int CellArchitecture::edge_count() const noexcept { return std::popcount(edges_); }

CellArchitecture CellArchitecture::with_edge_flipped(int from, int to) const {
  CellArchitecture out = *this;
  out.edges_ ^= 1ULL << bit(from, to);
  if ((out.edges_ & ~upper_mask(num_nodes_)) != 0) {
    throw Error(ErrorKind::SpecViolation, "edge flip outside upper triangle");
  }
  return out;
}

CellArchitecture CellArchitecture::with_op(int node, OpCode op) const {
  CellArchitecture out = *this;
  out.ops_.at(static_cast<std::size_t>(node)) = op;
  return out;
}

// --- validity -------------------------------------------------------------

std::optional<CellArchitecture> prune(const CellArchitecture& cell) {
  const int n = cell.num_nodes();
  const auto [fwd, bwd] = reachability(cell);
  if (!((fwd >> (n - 1)) & 1U)) return std::nullopt;
  const unsigned live = fwd & bwd;
  if (std::popcount(live) == n) return cell;

  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  std::vector<OpCode> ops;
  for (int i = 0; i < n; ++i) {
    if ((live >> i) & 1U) {
      remap[static_cast<std::size_t>(i)] = static_cast<int>(ops.size());
      ops.push_back(cell.op(i));
    }
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int ri = remap[static_cast<std::size_t>(i)];
      const int rj = remap[static_cast<std::size_t>(j)];
      if (cell.has_edge(i, j) && ri >= 0 && rj >= 0) bits |= 1ULL << CellArchitecture::bit(ri, rj);
    }
  }
  const int m = static_cast<int>(ops.size());
  return CellArchitecture(m, bits, std::move(ops));
}

bool all_nodes_live(const CellArchitecture& cell) {
  const auto [fwd, bwd] = reachability(cell);
  return std::popcount(fwd & bwd) == cell.num_nodes();
}

namespace {

std::optional<std::string> invalid_reason(const Architecture& arch, const SpaceSpec& spec) {
  if (std::holds_alternative<CellArchitecture>(arch) != spec.is_cell()) {
    return "architecture kind differs from space kind";
  }
  if (spec.is_block()) {
    const auto& b = as_block(arch);
    const auto& choices = spec.block_dims().choices;
    if (b.choices.size() != choices.size()) return "choice vector length differs from layer count";
    for (std::size_t l = 0; l < choices.size(); ++l) {
      if (b.choices[l].value >= choices[l]) return "choice out of range at layer " + std::to_string(l);
    }
    return std::nullopt;
  }
  const auto& c = as_cell(arch);
  const auto& d = spec.cell_dims();
  if (c.num_nodes() > d.max_nodes) return "too many nodes";
  if (c.edge_count() > d.max_edges) return "edge budget exceeded";
  if (c.op(0) != d.input_op) return "node 0 must carry the input sentinel";
  if (c.op(c.num_nodes() - 1) != d.output_op) return "last node must carry the output sentinel";
  const auto& inner = spec.intermediate_ops();
  for (int i = 1; i + 1 < c.num_nodes(); ++i) {
    if (!std::binary_search(inner.begin(), inner.end(), c.op(i))) {
      return "invalid op at node " + std::to_string(i);
    }
  }
  if (!all_nodes_live(c)) return "node not on an input->output path";
  return std::nullopt;
}

}  // namespace

bool is_valid(const Architecture& arch, const SpaceSpec& spec) { return !invalid_reason(arch, spec); }

void validate(const Architecture& arch, const SpaceSpec& spec) {
  if (auto why = invalid_reason(arch, spec)) {
    throw Error(ErrorKind::SpecViolation, *why + " (" + to_text(arch) + ")");
  }
}

// --- identity -------------------------------------------------------------

CanonicalKey canonical_key(const Architecture& arch) {
  return std::visit(overloaded{
                        [](const CellArchitecture& c) { return cell_key(c); },
                        [](const BlockArchitecture& b) {
                          std::string key = "B";
                          key.reserve(1 + 2 * b.choices.size());
                          for (auto c : b.choices) hex_byte(key, c.value);
                          return CanonicalKey{key};
                        },
                    },
                    arch);
}

int edit_distance(const Architecture& a, const Architecture& b, const SpaceSpec& spec) {
  require_same_kind(a, spec);
  require_same_kind(b, spec);
  if (spec.is_block()) {
    const auto& x = as_block(a).choices;
    const auto& y = as_block(b).choices;
    if (x.size() != y.size()) throw Error(ErrorKind::SpaceMismatch, "choice vectors differ in length");
    int d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d += x[i] != y[i];
    return d;
  }
  const auto pa = prune(as_cell(a));
  const auto pb = prune(as_cell(b));
  if (!pa || !pb) throw Error(ErrorKind::SpecViolation, "cell without an input->output path");
  return cell_distance(*pa, *pb);
}

int total_edit_distance(const SpaceSpec& spec) {
  if (spec.is_block()) return spec.num_layers();
  const auto& d = spec.cell_dims();
  return d.max_edges + (d.max_nodes - 2);
}

// --- atomic changes -------------------------------------------------------

std::vector<Move> legal_moves(const Architecture& arch, const SpaceSpec& spec, const MoveWeights& weights) {
  require_same_kind(arch, spec);
  std::vector<Move> moves;
  if (spec.is_block()) {
    if (weights.op <= 0.0) return moves;
    const auto& b = as_block(arch);
    const auto& choices = spec.block_dims().choices;
    for (std::size_t l = 0; l < choices.size(); ++l) {
      for (int c = 0; c < choices[l]; ++c) {
        if (c != b.choices[l].value) moves.push_back({ChangeType::op, static_cast<int>(l), c});
      }
    }
    return moves;
  }

  const auto& c = as_cell(arch);
  const int n = c.num_nodes();
  if (weights.edge > 0.0) {
    const bool can_add = c.edge_count() < spec.cell_dims().max_edges;
    const auto reach = descendants(c);
    // Any edge whose addition keeps the graph acyclic, in either direction of
    // the current labelling; removals must keep every node live.
    for (int u = 0; u + 1 < n; ++u) {
      for (int v = 1; v < n; ++v) {
        if (u == v) continue;
        if (u < v && c.has_edge(u, v)) {
          if (all_nodes_live(c.with_edge_flipped(u, v))) moves.push_back({ChangeType::edge, u, v});
        } else if (can_add && !((reach[static_cast<std::size_t>(v)] >> u) & 1U)) {
          moves.push_back({ChangeType::edge, u, v});
        }
      }
    }
  }
  if (weights.op > 0.0) {
    for (int i = 1; i + 1 < n; ++i) {
      for (auto op : spec.intermediate_ops()) {
        if (op != c.op(i)) moves.push_back({ChangeType::op, i, op.value});
      }
    }
  }
  return moves;
}

Architecture apply_move(const Architecture& arch, const Move& move) {
  return std::visit(overloaded{
                        [&](const CellArchitecture& c) -> Architecture {
                          if (move.type == ChangeType::edge) {
                            if (move.target < move.value && c.has_edge(move.target, move.value)) {
                              return c.with_edge_flipped(move.target, move.value);
                            }
                            return with_edge_added(c, move.target, move.value);
                          }
                          return c.with_op(move.target, OpCode{static_cast<std::uint16_t>(move.value)});
                        },
                        [&](const BlockArchitecture& b) -> Architecture {
                          BlockArchitecture out = b;
                          out.choices.at(static_cast<std::size_t>(move.target)) =
                              OpCode{static_cast<std::uint16_t>(move.value)};
                          return out;
                        },
                    },
                    arch);
}

bool has_legal_move(const Architecture& arch, const SpaceSpec& spec, const MoveWeights& weights) {
  return !legal_moves(arch, spec, weights).empty();
}

Architecture mutate_once(const Architecture& arch, const SpaceSpec& spec, Rng& rng, const MoveWeights& weights) {
  bool stuck = false;
  return step_avoiding(arch, nullptr, spec, rng, weights, stuck);
}

Architecture walk_changes(const Architecture& arch, int changes, const SpaceSpec& spec, Rng& rng,
                          const MoveWeights& weights) {
  if (changes < 1) throw Error(ErrorKind::InvalidArgument, "number of changes must be >= 1");
  Architecture previous = arch;
  Architecture cur = mutate_once(arch, spec, rng, weights);
  for (int step = 1; step < changes; ++step) {
    bool stuck = false;
    Architecture next = step_avoiding(cur, &previous, spec, rng, weights, stuck);
    if (stuck) break;
    previous = std::move(cur);
    cur = std::move(next);
  }
  // Cells can wander back onto an isomorph of the start after three or more changes.
  if (same_state(cur, arch)) cur = mutate_once(cur, spec, rng, weights);
  return cur;
}

Architecture generate_neighbor(const Architecture& arch, int max_d, const SpaceSpec& spec, Rng& rng,
                               const MoveWeights& weights) {
  if (max_d < 1 || max_d > total_edit_distance(spec)) {
    throw Error(ErrorKind::InvalidArgument, "max_d must lie in [1, total_edit_distance]");
  }
  std::uniform_int_distribution<int> dist(1, max_d);
  return walk_changes(arch, dist(rng), spec, rng, weights);
}

std::vector<Architecture> random_walk(const Architecture& arch, int steps, const SpaceSpec& spec, Rng& rng) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "random walk needs >= 1 step");
  std::vector<Architecture> walk;
  walk.reserve(static_cast<std::size_t>(steps) + 1);
  walk.push_back(arch);
  for (int s = 0; s < steps; ++s) walk.push_back(mutate_once(walk.back(), spec, rng));
  return walk;
}

// --- text form ------------------------------------------------------------

std::string to_text(const Architecture& arch) {
  std::string out;
  std::visit(overloaded{
                 [&](const CellArchitecture& c) {
                   const int n = c.num_nodes();
                   for (int i = 0; i < n; ++i)
                     for (int j = i + 1; j < n; ++j) out.push_back(c.has_edge(i, j) ? '1' : '0');
                   out.push_back('|');
                   for (int i = 0; i < n; ++i) {
                     if (i) out.push_back(',');
                     out += std::to_string(c.op(i).value);
                   }
                 },
                 [&](const BlockArchitecture& b) {
                   for (std::size_t i = 0; i < b.choices.size(); ++i) {
                     if (i) out.push_back(',');
                     out += std::to_string(b.choices[i].value);
                   }
                 },
             },
             arch);
  return out;
}

namespace {

std::vector<OpCode> parse_codes(const std::string& text) {
  std::vector<OpCode> codes;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok.empty() || tok.size() > 5 || tok.find_first_not_of("0123456789") != std::string::npos) {
      throw Error(ErrorKind::ParseError, "bad op code '" + tok + "' in '" + text + "'");
    }
    const unsigned long v = std::stoul(tok);
    if (v > 0xFFFE) throw Error(ErrorKind::ParseError, "op code too large in '" + text + "'");
    codes.push_back(OpCode{static_cast<std::uint16_t>(v)});
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return codes;
}

}  // namespace

Architecture parse_architecture(const std::string& text, const SpaceSpec& spec) {
  if (spec.is_block()) {
    if (text.find('|') != std::string::npos) throw Error(ErrorKind::ParseError, "cell text in a block space");
    return BlockArchitecture{parse_codes(text)};
  }
  const std::size_t bar = text.find('|');
  if (bar == std::string::npos) throw Error(ErrorKind::ParseError, "cell text needs '|' separator: '" + text + "'");
  auto ops = parse_codes(text.substr(bar + 1));
  const int n = static_cast<int>(ops.size());
  if (n < 2 || n > kMaxCellStorageNodes) throw Error(ErrorKind::ParseError, "cell node count out of range");
  const std::string bits = text.substr(0, bar);
  if (static_cast<int>(bits.size()) != n * (n - 1) / 2) {
    throw Error(ErrorKind::ParseError, "upper-triangle bit count does not match node count in '" + text + "'");
  }
  std::uint64_t edges = 0;
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++k) {
      if (bits[k] == '1') {
        edges |= 1ULL << CellArchitecture::bit(i, j);
      } else if (bits[k] != '0') {
        throw Error(ErrorKind::ParseError, "adjacency bits must be 0/1 in '" + text + "'");
      }
    }
  }
  return CellArchitecture(n, edges, std::move(ops));
}

}  // namespace lissnas
