#pragma once

// Drives a cubical knot into the Menger sponge M^3_1 one level at a time.
//
// Stage l works on the knot's own lattice (scale 3^s, s >= l). An edge is
// good at stage l when some retained depth-l cube contains it. Every maximal
// run of bad edges is rerouted by a best-first search over spike / unspike /
// slide moves, each of whose swept square lies in a retained depth-(l-1)
// cube, so containment at shallower depths is never disturbed. When a stage
// cannot be completed the knot is rescaled by 3 and the stage retried.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "errors.hpp"
#include "invariants.hpp"
#include "knot.hpp"
#include "lattice.hpp"
#include "menger.hpp"

namespace menger_knots {

struct PipelineConfig {
  int target_depth = 1;
  int max_autoscale = 3;
  std::uint64_t search_budget = 1'000'000;
  std::uint64_t seed = 0;

  void check() const {
    if (target_depth < 1) throw ParameterError("target depth must be at least 1");
    if (max_autoscale < 0) throw ParameterError("max_autoscale must be non-negative");
    if (search_budget == 0) throw ParameterError("search budget must be positive");
  }
};

// Largest knot scale the pipeline handles (packed coordinates use 20 bits).
inline constexpr int kMaxPipelineScale = 12;

inline const std::vector<int>& audit_primes() {
  static const std::vector<int> primes{3, 5, 7};
  return primes;
}

// One step of the certified history, applied in order to the input knot.
struct LogEntry {
  enum class Op { translate, rescale, move };
  Op op = Op::move;
  LatticePoint offset;  // translate: added to every vertex
  int scale_exp = 0;    // translate: scale exponent assigned afterwards
  int factor = 3;       // rescale
  int stage = 0;        // move: pipeline stage that emitted it
  MoveRecord move;

  static LogEntry translation(LatticePoint offset, int scale_exp) {
    LogEntry e;
    e.op = Op::translate;
    e.offset = std::move(offset);
    e.scale_exp = scale_exp;
    return e;
  }
  static LogEntry rescaling(int factor) {
    LogEntry e;
    e.op = Op::rescale;
    e.factor = factor;
    return e;
  }
  static LogEntry of_move(const MoveRecord& mv, int stage) {
    LogEntry e;
    e.op = Op::move;
    e.move = mv;
    e.stage = stage;
    return e;
  }

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct StageFailure {
  int level = 0;
  std::size_t first_edge = 0;  // index of the first bad edge of the blocked run
  std::size_t run_length = 0;
  std::string region;          // depth-l address of a bad cube around the run
  std::string reason;
};

struct StageResult {
  bool ok = false;
  CubicalKnot knot;
  std::vector<MoveRecord> moves;
  std::uint64_t nodes = 0;
  StageFailure failure;
};

namespace detail {

// Points of [0, 2^20)^3 packed as x<<40 | y<<20 | z.
using Packed = std::uint64_t;
inline constexpr int kShift[3] = {40, 20, 0};
inline constexpr Packed kMask = (Packed{1} << 20) - 1;

inline Packed pack(Coord x, Coord y, Coord z) {
  return (static_cast<Packed>(x) << 40) | (static_cast<Packed>(y) << 20) | static_cast<Packed>(z);
}
inline Packed pack(const LatticePoint& p) { return pack(p[0], p[1], p[2]); }
inline Coord coord(Packed p, int axis) { return static_cast<Coord>((p >> kShift[axis]) & kMask); }
inline LatticePoint unpack(Packed p) { return LatticePoint{coord(p, 0), coord(p, 1), coord(p, 2)}; }

// Packed displacement; callers guarantee the result stays in range.
inline Packed step(Packed p, const Direction& d) {
  const Packed unit = Packed{1} << kShift[d.axis];
  return d.sign > 0 ? p + unit : p - unit;
}

inline std::optional<Direction> direction_between(Packed a, Packed b) {
  for (int axis = 0; axis < 3; ++axis) {
    const Coord da = coord(b, axis) - coord(a, axis);
    if (da == 0) continue;
    for (int other = axis + 1; other < 3; ++other) {
      if (coord(b, other) != coord(a, other)) return std::nullopt;
    }
    if (da == 1 || da == -1) return Direction{axis, static_cast<int>(da)};
    return std::nullopt;
  }
  return std::nullopt;
}

// Retention of the depth-k cube (x, y, z) of M^3_1.
inline bool retained3(Coord x, Coord y, Coord z, int k) {
  for (int l = 0; l < k; ++l) {
    if ((x % 3 == 1) + (y % 3 == 1) + (z % 3 == 1) > 1) return false;
    x /= 3;
    y /= 3;
    z /= 3;
  }
  return true;
}

// Geometry predicates for one stage: goodness of edges at depth `level` and
// confinement of squares to retained depth-(level-1) cubes, both memoized.
class StageOracle {
 public:
  StageOracle(int scale_exp, int level) : s_(scale_exp), level_(level), extent_(pow3(scale_exp)) {}

  [[nodiscard]] Coord extent() const { return extent_; }
  [[nodiscard]] int level() const { return level_; }

  [[nodiscard]] bool in_domain(Packed p) const {
    return coord(p, 0) <= extent_ && coord(p, 1) <= extent_ && coord(p, 2) <= extent_;
  }

  // Edge from `lo` one unit along +axis.
  bool edge_good(Packed lo, int axis) {
    const Packed key = (lo << 2) | static_cast<Packed>(axis);
    if (auto it = good_.find(key); it != good_.end()) return it->second;
    const bool g = contained(lo, static_cast<unsigned>(1U << axis), level_);
    good_.emplace(key, g);
    return g;
  }

  bool edge_good(Packed a, Packed b) {
    const auto d = direction_between(a, b);
    return edge_good(std::min(a, b), d->axis);
  }

  // Unit square with minimal corner `lo` spanning the two axes in `mask`.
  bool square_confined(Packed lo, unsigned mask) {
    const Packed key = (lo << 3) | mask;
    if (auto it = confined_.find(key); it != confined_.end()) return it->second;
    bool c = true;
    for (int a = 0; a < 3; ++a) {
      const Coord hi = coord(lo, a) + (((mask >> a) & 1U) ? 1 : 0);
      if (hi > extent_) c = false;
    }
    c = c && contained(lo, mask, level_ - 1);
    confined_.emplace(key, c);
    return c;
  }

  // 0 for a good edge, otherwise 1 + the L1 length of the smallest
  // perpendicular shift that makes it good (capped).
  int badness(Packed a, Packed b) {
    const Packed lo = std::min(a, b);
    const int axis = direction_between(a, b)->axis;
    if (edge_good(lo, axis)) return 0;
    const Packed key = (lo << 2) | static_cast<Packed>(axis);
    if (auto it = badness_.find(key); it != badness_.end()) return it->second;
    const int p = (axis + 1) % 3;
    const int q = (axis + 2) % 3;
    const Coord radius_cap = 2 * pow3(s_ - level_) + 1;
    int result = static_cast<int>(radius_cap) + 2;
    for (Coord r = 1; r <= radius_cap && result > static_cast<int>(radius_cap) + 1; ++r) {
      for (Coord dp = -r; dp <= r; ++dp) {
        const Coord rest = r - (dp < 0 ? -dp : dp);
        for (Coord dq : {-rest, rest}) {
          const Coord np = coord(lo, p) + dp;
          const Coord nq = coord(lo, q) + dq;
          if (np < 0 || nq < 0 || np > extent_ || nq > extent_) continue;
          Coord c[3] = {coord(lo, 0), coord(lo, 1), coord(lo, 2)};
          c[p] = np;
          c[q] = nq;
          if (edge_good(pack(c[0], c[1], c[2]), axis)) {
            result = static_cast<int>(r) + 1;
            break;
          }
          if (rest == 0) break;
        }
        if (result <= static_cast<int>(radius_cap) + 1) break;
      }
    }
    badness_.emplace(key, result);
    return result;
  }

 private:
  // Some retained depth-k cube contains the cell (lo, mask) of scale 3^s.
  [[nodiscard]] bool contained(Packed lo, unsigned mask, int k) const {
    const Coord side = pow3(s_ - k);
    const Coord per_axis = pow3(k);
    Coord choice[3][2];
    int count[3];
    for (int a = 0; a < 3; ++a) {
      const Coord v = coord(lo, a);
      count[a] = 0;
      if ((mask >> a) & 1U) {
        if (v + 1 > extent_) return false;
        choice[a][count[a]++] = v / side;
      } else if (v % side == 0) {
        if (v / side - 1 >= 0) choice[a][count[a]++] = v / side - 1;
        if (v / side < per_axis) choice[a][count[a]++] = v / side;
      } else {
        choice[a][count[a]++] = v / side;
      }
    }
    for (int i = 0; i < count[0]; ++i) {
      for (int j = 0; j < count[1]; ++j) {
        for (int l = 0; l < count[2]; ++l) {
          if (retained3(choice[0][i], choice[1][j], choice[2][l], k)) return true;
        }
      }
    }
    return false;
  }

  int s_;
  int level_;
  Coord extent_;
  std::unordered_map<Packed, bool> good_;
  std::unordered_map<Packed, bool> confined_;
  std::unordered_map<Packed, int> badness_;
};

struct PackedMove {
  Packed anchor = 0;
  MoveKind kind = MoveKind::spike;
  Direction edge;
  Direction push;

  [[nodiscard]] MoveRecord record() const { return {kind, unpack(anchor), edge, push}; }
};

// Applies a move to an open path whose endpoints stay fixed. `blocked` holds
// the knot vertices outside the path. Mirrors apply_move in knot.hpp; the
// pipeline re-applies every emitted move through that checked path.
class PathEditor {
 public:
  PathEditor(StageOracle& oracle, const std::unordered_set<Packed>& blocked) : oracle_(oracle), blocked_(blocked) {}

  bool apply(std::vector<Packed>& path, const PackedMove& mv) const {
    const Packed u = mv.anchor;
    const Direction a = mv.edge;
    const Direction w = mv.push;
    if (a.axis == w.axis) return false;
    // Every vertex involved lies on the swept square; check it first so that
    // packed arithmetic never leaves the domain.
    const unsigned mask = (1U << a.axis) | (1U << w.axis);
    Packed lo = u;
    if (a.sign < 0) {
      if (coord(lo, a.axis) == 0) return false;
      lo = step(lo, a);
    }
    if (w.sign < 0) {
      if (coord(lo, w.axis) == 0) return false;
      lo = step(lo, w);
    }
    if (!oracle_.square_confined(lo, mask)) return false;

    const Packed ua = step(u, a);
    const Packed uw = step(u, w);
    const Packed uaw = step(ua, w);
    const auto idx = find(path, u);
    if (!idx) return false;
    const std::size_t i = *idx;
    const std::size_t n = path.size();
    const auto is_free = [&](Packed p) { return !blocked_.contains(p) && !find(path, p); };
    const auto matches = [&](std::size_t start, int dir, std::initializer_list<Packed> pattern) {
      std::size_t k = 0;
      for (Packed p : pattern) {
        const auto pos = static_cast<std::ptrdiff_t>(start) + dir * static_cast<std::ptrdiff_t>(k);
        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(n) || path[static_cast<std::size_t>(pos)] != p) return false;
        ++k;
      }
      return true;
    };
    switch (mv.kind) {
      case MoveKind::spike: {
        if (!is_free(uw) || !is_free(uaw)) return false;
        if (matches(i, 1, {u, ua})) {
          path.insert(path.begin() + static_cast<std::ptrdiff_t>(i) + 1, {uw, uaw});
          return true;
        }
        if (matches(i, -1, {u, ua})) {
          path.insert(path.begin() + static_cast<std::ptrdiff_t>(i), {uaw, uw});
          return true;
        }
        return false;
      }
      case MoveKind::unspike: {
        for (int dir : {1, -1}) {
          if (matches(i, dir, {u, uw, uaw, ua})) {
            const std::size_t i1 = dir > 0 ? i + 1 : i - 2;
            path.erase(path.begin() + static_cast<std::ptrdiff_t>(i1), path.begin() + static_cast<std::ptrdiff_t>(i1) + 2);
            return true;
          }
        }
        return false;
      }
      case MoveKind::slide: {
        if (!is_free(uw)) return false;
        for (int dir : {1, -1}) {
          if (matches(i, dir, {u, ua, uaw})) {
            path[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + dir)] = uw;
            return true;
          }
        }
        return false;
      }
    }
    return false;
  }

 private:
  static std::optional<std::size_t> find(const std::vector<Packed>& path, Packed p) {
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (path[i] == p) return i;
    }
    return std::nullopt;
  }

  StageOracle& oracle_;
  const std::unordered_set<Packed>& blocked_;
};

inline std::vector<Direction> perpendicular(const Direction& a, const std::vector<Direction>& order) {
  std::vector<Direction> out;
  for (const auto& d : order) {
    if (d.axis != a.axis) out.push_back(d);
  }
  return out;
}

// Candidate actions on a path: every elementary move plus, for each straight
// run of two or more edges, the move sequence that pushes the run one unit
// sideways (a spike or slide at the start, slides along, and a slide or
// unspike at the end).
inline std::vector<std::vector<PackedMove>> candidate_actions(const std::vector<Packed>& path,
                                                              const std::vector<Direction>& order) {
  std::vector<std::vector<PackedMove>> out;
  const std::size_t n = path.size();
  std::vector<Direction> dirs;
  dirs.reserve(n);
  for (std::size_t j = 0; j + 1 < n; ++j) dirs.push_back(*direction_between(path[j], path[j + 1]));

  for (std::size_t j = 0; j + 1 < n; ++j) {
    for (const auto& w : perpendicular(dirs[j], order)) out.push_back({{path[j], MoveKind::spike, dirs[j], w}});
  }
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (dirs[j - 1].axis != dirs[j].axis) out.push_back({{path[j - 1], MoveKind::slide, dirs[j - 1], dirs[j]}});
  }
  for (std::size_t j = 0; j + 3 < n; ++j) {
    const Direction w = dirs[j];
    const Direction a = dirs[j + 1];
    if (w.axis != a.axis && dirs[j + 2] == w.reversed()) out.push_back({{path[j], MoveKind::unspike, a, w}});
  }
  std::size_t start = 0;
  while (start + 1 < n) {
    std::size_t end = start + 1;
    while (end + 1 < n && dirs[end] == dirs[start]) ++end;
    const std::size_t run = end - start;
    if (run >= 2) {
      const Direction a = dirs[start];
      for (const auto& w : perpendicular(a, order)) {
        std::vector<PackedMove> seq;
        const Packed p0 = path[start];
        if (start > 0 && path[start - 1] == step(p0, w)) {
          seq.push_back({path[start - 1], MoveKind::slide, w.reversed(), a});
        } else {
          seq.push_back({p0, MoveKind::spike, a, w});
        }
        for (std::size_t t = 1; t < run; ++t) {
          const Packed pt = path[start + t];
          const Packed pr = path[end];
          if (t == run - 1 && end + 1 < n && path[end + 1] == step(pr, w)) {
            seq.push_back({step(pt, w), MoveKind::unspike, a, w.reversed()});
          } else {
            seq.push_back({step(pt, w), MoveKind::slide, w.reversed(), a});
          }
        }
        out.push_back(std::move(seq));
      }
    }
    start = end;
  }
  return out;
}

struct LocalSearchResult {
  bool ok = false;
  std::vector<MoveRecord> moves;
  std::uint64_t nodes = 0;
  std::string reason;
};

struct PackedPathHash {
  std::size_t operator()(const std::vector<Packed>& v) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Packed p : v) {
      h ^= p;
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

// Best-first search (weighted A*) over move sequences on one open subpath
// until all its edges are good.
inline LocalSearchResult search_subpath(const std::vector<Packed>& start, const std::unordered_set<Packed>& blocked,
                                        StageOracle& oracle, std::uint64_t budget, const std::vector<Direction>& order,
                                        std::size_t min_vertices = 2) {
  constexpr std::uint64_t kWeight = 4;
  const PathEditor editor(oracle, blocked);
  const auto heuristic = [&](const std::vector<Packed>& path) {
    std::uint64_t h = 0;
    for (std::size_t j = 0; j + 1 < path.size(); ++j) h += static_cast<std::uint64_t>(oracle.badness(path[j], path[j + 1]));
    return h;
  };
  const std::size_t length_cap =
      2 * start.size() + 16 + 8 * static_cast<std::size_t>(oracle.extent() / pow3(oracle.level()));

  // Nodes keep only their parent and the moves that reached them; a path is
  // rebuilt by replaying from the start when the node is expanded.
  struct Node {
    std::uint32_t parent;
    std::uint32_t move_begin;
    std::uint32_t move_count;
    std::uint32_t g;
  };
  std::vector<Node> nodes;
  std::vector<PackedMove> move_pool;
  std::unordered_set<std::size_t> seen;  // path hashes; a collision only prunes a state
  const PackedPathHash hash_path;
  using Entry = std::tuple<std::uint64_t, std::uint64_t, std::uint32_t>;  // f, h, id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const auto chain_of = [&](std::uint32_t id) {
    std::vector<std::uint32_t> chain;
    for (std::uint32_t cur = id; cur != 0; cur = nodes[cur].parent) chain.push_back(cur);
    std::reverse(chain.begin(), chain.end());
    return chain;
  };

  nodes.push_back({0, 0, 0, 0});
  seen.insert(hash_path(start));
  open.emplace(kWeight * heuristic(start), heuristic(start), 0);

  LocalSearchResult result;
  while (!open.empty()) {
    const auto [f, h, id] = open.top();
    open.pop();
    const auto chain = chain_of(id);
    if (h == 0) {
      for (std::uint32_t c : chain) {
        for (std::uint32_t k = 0; k < nodes[c].move_count; ++k) result.moves.push_back(move_pool[nodes[c].move_begin + k].record());
      }
      result.ok = true;
      result.nodes = nodes.size();
      return result;
    }
    std::vector<Packed> base = start;
    for (std::uint32_t c : chain) {
      for (std::uint32_t k = 0; k < nodes[c].move_count; ++k) editor.apply(base, move_pool[nodes[c].move_begin + k]);
    }
    const std::uint32_t g = nodes[id].g;
    for (const auto& action : candidate_actions(base, order)) {
      std::vector<Packed> next = base;
      bool legal = true;
      for (const auto& mv : action) {
        if (!editor.apply(next, mv)) {
          legal = false;
          break;
        }
      }
      if (!legal || next.size() > length_cap || next.size() < min_vertices || !seen.insert(hash_path(next)).second) continue;
      const std::uint64_t nh = heuristic(next);
      const auto nid = static_cast<std::uint32_t>(nodes.size());
      const auto ng = static_cast<std::uint32_t>(g + action.size());
      nodes.push_back({id, static_cast<std::uint32_t>(move_pool.size()), static_cast<std::uint32_t>(action.size()), ng});
      move_pool.insert(move_pool.end(), action.begin(), action.end());
      open.emplace(ng + kWeight * nh, nh, nid);
      if (nodes.size() >= budget) {
        result.nodes = nodes.size();
        result.reason = "search budget of " + std::to_string(budget) + " nodes exhausted";
        return result;
      }
    }
  }
  result.nodes = nodes.size();
  result.reason = "move search space exhausted";
  return result;
}

// Shortest path from `from` to `to` over good edges inside `box`, avoiding
// `blocked`. Used to detect runs that cannot be rerouted at this scale.
inline std::optional<std::size_t> detour_length(Packed from, Packed to, const std::unordered_set<Packed>& blocked,
                                                StageOracle& oracle, const Coord box_lo[3], const Coord box_hi[3]) {
  std::unordered_map<Packed, std::size_t> dist;
  std::vector<Packed> frontier{from};
  dist.emplace(from, 0);
  std::size_t d = 0;
  while (!frontier.empty()) {
    ++d;
    std::vector<Packed> next;
    for (Packed p : frontier) {
      for (const auto& dir : all_directions()) {
        const Coord c = coord(p, dir.axis) + dir.sign;
        if (c < box_lo[dir.axis] || c > box_hi[dir.axis]) continue;
        const Packed q = step(p, dir);
        if (dist.contains(q) || (blocked.contains(q) && q != to)) continue;
        if (!oracle.edge_good(std::min(p, q), dir.axis)) continue;
        if (q == to) return d;
        dist.emplace(q, d);
        next.push_back(q);
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

inline std::vector<Direction> seeded_direction_order(std::uint64_t seed, int level) {
  std::vector<Direction> order = all_directions();
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(level));
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

}  // namespace detail

// Moves the knot into M^3_1(level) without leaving M^3_1(level - 1).
// Requires a valid domain-bound knot with scale_exp >= level >= 1 that is
// already contained at depth level - 1.
inline StageResult stage_fix(const CubicalKnot& input, int level, const PipelineConfig& config) {
  using detail::Packed;
  const int s = input.scale_exp();
  if (level < 1 || level > s) {
    throw ParameterError("stage level " + std::to_string(level) + " outside [1, scale " + std::to_string(s) + "]");
  }
  if (s > kMaxPipelineScale) throw ResourceError("knot scale exceeds pipeline cap " + std::to_string(kMaxPipelineScale));
  if (const auto v = validate(input); !v) throw ParameterError("invalid knot: " + v.message);
  if (!fits_domain(input)) throw ParameterError("knot outside its domain [0, 3^" + std::to_string(s) + "]^3");
  if (level > 1 && !knot_in_approximant(input, {3, 1, level - 1})) {
    throw ParameterError("knot is not contained at depth " + std::to_string(level - 1));
  }

  detail::StageOracle oracle(s, level);
  const std::vector<Direction> order = detail::seeded_direction_order(config.seed, level);
  StageResult result;
  result.knot = input;

  while (true) {
    const auto& verts = result.knot.vertices();
    const std::size_t n = verts.size();
    std::vector<Packed> packed;
    packed.reserve(n);
    for (const auto& p : verts) packed.push_back(detail::pack(p));
    std::vector<bool> bad(n);
    std::size_t bad_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bad[i] = !oracle.edge_good(packed[i], packed[(i + 1) % n]);
      bad_count += bad[i] ? 1 : 0;
    }
    if (bad_count == 0) {
      result.ok = true;
      return result;
    }

    // First bad edge in index order, extended to its maximal cyclic run.
    std::size_t first = 0;
    while (!bad[first]) ++first;
    auto failure = [&](std::size_t run_start, std::size_t run_len, std::string reason) {
      result.ok = false;
      result.failure.level = level;
      result.failure.first_edge = run_start;
      result.failure.run_length = run_len;
      result.failure.reason = std::move(reason);
      const Cell e = result.knot.edge(run_start);
      const Coord side = pow3(s - level);
      LatticePoint corner(3);
      for (int a = 0; a < 3; ++a) corner[a] = std::min(e.corner()[a] / side, pow3(level) - 1);
      result.failure.region = address_of(corner, level).to_string();
      return result;
    };
    if (bad_count == n) return failure(0, n, "every edge lies in the removed region");
    std::size_t run_start = first;
    if (first == 0) {
      while (bad[(run_start + n - 1) % n]) run_start = (run_start + n - 1) % n;
    }
    std::size_t run_len = 0;
    while (bad[(run_start + run_len) % n]) ++run_len;

    bool fixed = false;
    std::string reason;
    const auto cell = static_cast<std::size_t>(pow3(s - level));
    for (std::size_t margin : {std::size_t{2}, cell + 2, 3 * cell + 2}) {
      const std::size_t m = std::min(margin, (n - run_len - 1) / 2);
      const std::size_t win_start = (run_start + n - m) % n;
      const std::size_t win_len = run_len + 2 * m;  // edges
      std::vector<Packed> window;
      for (std::size_t k = 0; k <= win_len; ++k) window.push_back(packed[(win_start + k) % n]);
      std::unordered_set<Packed> blocked;
      for (std::size_t k = win_len + 1; k < n; ++k) blocked.insert(packed[(win_start + k) % n]);

      Coord lo[3];
      Coord hi[3];
      const Coord pad = 2 * pow3(s - level) + 2;
      for (int a = 0; a < 3; ++a) {
        lo[a] = oracle.extent();
        hi[a] = 0;
        for (Packed p : window) {
          lo[a] = std::min(lo[a], detail::coord(p, a));
          hi[a] = std::max(hi[a], detail::coord(p, a));
        }
        lo[a] = std::max<Coord>(0, lo[a] - pad);
        hi[a] = std::min<Coord>(oracle.extent(), hi[a] + pad);
      }
      if (!detail::detour_length(window.front(), window.back(), blocked, oracle, lo, hi)) {
        reason = "no good detour around the removed region";
        continue;
      }
      // The closed knot keeps at least 4 edges.
      const std::size_t outside = n - win_len;
      const std::size_t min_vertices = outside >= 4 ? 2 : 5 - outside;
      const auto local = detail::search_subpath(window, blocked, oracle, config.search_budget, order, min_vertices);
      result.nodes += local.nodes;
      if (!local.ok) {
        reason = local.reason;
        continue;
      }
      CubicalKnot next = result.knot;
      for (const auto& mv : local.moves) next = apply_move(next, mv);
      result.knot = std::move(next);
      result.moves.insert(result.moves.end(), local.moves.begin(), local.moves.end());
      fixed = true;
      break;
    }
    if (!fixed) return failure(run_start, run_len, reason);
  }
}

struct EdgeWitness {
  LatticePoint from;
  LatticePoint to;
  CubeAddress cube;  // retained depth-s cube having the edge as an edge
};

struct MengerCertificate {
  static constexpr int kVersion = 1;
  PipelineConfig config;
  CubicalKnot original;
  std::vector<LogEntry> log;
  CubicalKnot knot;
  std::vector<EdgeWitness> witnesses;
  std::string lemma_ref;
  std::map<int, std::uint64_t> invariants_before;
  std::map<int, std::uint64_t> invariants_after;
};

class PipelineFailure : public std::runtime_error {
 public:
  explicit PipelineFailure(const std::string& what, StageFailure stage = {})
      : std::runtime_error(what), stage_(std::move(stage)) {}
  [[nodiscard]] const StageFailure& stage() const { return stage_; }

 private:
  StageFailure stage_;
};

// Rigid placement into [0, 3^s]^3: the identity when the knot already fits
// its declared domain, else a translation of the bounding box to the origin
// together with the smallest scale exponent that contains it.
inline std::optional<LogEntry> placement(const CubicalKnot& knot) {
  if (fits_domain(knot)) return std::nullopt;
  LatticePoint lo = knot.vertex(0);
  LatticePoint hi = knot.vertex(0);
  for (const auto& p : knot.vertices()) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  Coord extent = 0;
  for (int a = 0; a < 3; ++a) extent = std::max(extent, hi[a] - lo[a]);
  int s = knot.scale_exp();
  while (pow3(s) < extent) ++s;
  return LogEntry::translation(Coord{-1} * lo, s);
}

inline CubicalKnot apply_log_entry(const CubicalKnot& knot, const LogEntry& e) {
  switch (e.op) {
    case LogEntry::Op::translate: return {translate(knot, e.offset).vertices(), e.scale_exp};
    case LogEntry::Op::rescale: return scale(knot, e.factor);
    case LogEntry::Op::move: return apply_move(knot, e.move);
  }
  return knot;
}

// Witness for every edge: the first retained depth-s unit cube (in corner
// order) that has the edge as an edge.
inline std::vector<EdgeWitness> edge_witnesses(const CubicalKnot& knot) {
  std::vector<EdgeWitness> out;
  out.reserve(knot.size());
  for (std::size_t i = 0; i < knot.size(); ++i) {
    const auto cube = find_containing_cube(knot.edge(i), knot.scale_exp(), knot.scale_exp(), 1);
    if (!cube) throw PipelineFailure("internal: edge " + std::to_string(i) + " has no retained cube");
    out.push_back({knot.vertex(i), knot.vertex(i + 1), *cube});
  }
  return out;
}

// Isotopes `input` into M^3_1 and returns a certificate whose final knot lies
// in every approximant M^3_1(k). Throws PipelineFailure when a stage still
// fails after max_autoscale rescalings.
inline MengerCertificate embed_in_menger(const CubicalKnot& input, const PipelineConfig& config) {
  config.check();
  if (const auto v = validate(input); !v) throw ParameterError("invalid knot: " + v.message);

  const RefinementReport lemma = refinement_lemma_check(3, 1);
  if (!lemma.holds()) throw PipelineFailure("refinement lemma check failed for m=3, n=1");

  MengerCertificate cert;
  cert.config = config;
  cert.original = input;
  cert.lemma_ref = lemma.id();
  cert.invariants_before = invariant_report(input, audit_primes(), config.seed).colorings;

  CubicalKnot knot = input;
  if (auto place = placement(knot)) {
    knot = apply_log_entry(knot, *place);
    cert.log.push_back(*place);
  }
  if (knot.scale_exp() > config.target_depth) {
    throw ParameterError("knot needs scale " + std::to_string(knot.scale_exp()) + " > target depth " +
                         std::to_string(config.target_depth));
  }

  const auto rescale = [&] {
    const LogEntry e = LogEntry::rescaling(3);
    knot = apply_log_entry(knot, e);
    cert.log.push_back(e);
  };
  int autoscales = 0;
  for (int level = 1; level <= std::max(knot.scale_exp(), config.target_depth);) {
    if (knot.scale_exp() < level) rescale();
    const StageResult stage = stage_fix(knot, level, config);
    if (stage.ok) {
      for (const auto& mv : stage.moves) cert.log.push_back(LogEntry::of_move(mv, level));
      knot = stage.knot;
      ++level;
      continue;
    }
    if (autoscales == config.max_autoscale) {
      throw PipelineFailure("stage " + std::to_string(level) + " failed after " + std::to_string(autoscales) +
                                " rescalings: " + stage.failure.reason + " (edge " +
                                std::to_string(stage.failure.first_edge) + ", run of " +
                                std::to_string(stage.failure.run_length) + ", region " + stage.failure.region + ")",
                            stage.failure);
    }
    ++autoscales;
    rescale();
  }

  cert.knot = knot;
  cert.witnesses = edge_witnesses(knot);
  cert.invariants_after = invariant_report(knot, audit_primes(), config.seed).colorings;
  if (cert.invariants_after != cert.invariants_before) {
    throw PipelineFailure("internal: Fox coloring counts changed across the move log");
  }
  return cert;
}

}  // namespace menger_knots
