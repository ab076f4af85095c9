#pragma once

// Cubical knots: closed embedded unit-step polygons in Z^3, plus the three
// square-local moves (spike, unspike, slide). Each move sweeps one unit square
// whose only contact with the rest of the knot is the replaced segment, so it
// is realized by an ambient isotopy supported near that square.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "menger.hpp"

namespace menger_knots {

// A signed coordinate axis of R^3.
struct Direction {
  int axis = 0;
  int sign = 1;

  [[nodiscard]] LatticePoint vec() const { return LatticePoint::unit(3, axis, sign); }
  [[nodiscard]] Direction reversed() const { return {axis, -sign}; }

  [[nodiscard]] std::string to_string() const {
    return std::string(sign > 0 ? "+" : "-") + static_cast<char>('x' + axis);
  }

  static Direction parse(const std::string& s) {
    if (s.size() != 2 || (s[0] != '+' && s[0] != '-') || s[1] < 'x' || s[1] > 'z') {
      throw FormatError("bad direction '" + s + "'");
    }
    return {s[1] - 'x', s[0] == '+' ? 1 : -1};
  }

  // Direction of the unit step a -> b, if it is one.
  static std::optional<Direction> between(const LatticePoint& a, const LatticePoint& b) {
    std::optional<Direction> d;
    for (int i = 0; i < 3; ++i) {
      const Coord delta = b[i] - a[i];
      if (delta == 0) continue;
      if (std::llabs(delta) != 1 || d) return std::nullopt;
      d = Direction{i, static_cast<int>(delta)};
    }
    return d;
  }

  friend auto operator<=>(const Direction&, const Direction&) = default;
};

// All six directions in a fixed order: +x -x +y -y +z -z.
inline const std::vector<Direction>& all_directions() {
  static const std::vector<Direction> dirs{{0, 1}, {0, -1}, {1, 1}, {1, -1}, {2, 1}, {2, -1}};
  return dirs;
}

class CubicalKnot {
 public:
  CubicalKnot() = default;
  CubicalKnot(std::vector<LatticePoint> vertices, int scale_exp)
      : vertices_(std::move(vertices)), scale_exp_(scale_exp) {
    if (scale_exp_ < 0) throw ParameterError("scale exponent must be non-negative");
  }

  [[nodiscard]] const std::vector<LatticePoint>& vertices() const { return vertices_; }
  [[nodiscard]] int scale_exp() const { return scale_exp_; }
  [[nodiscard]] std::size_t size() const { return vertices_.size(); }
  [[nodiscard]] const LatticePoint& vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }

  // Edge i joins vertex i and vertex i+1 (cyclically), as a canonical 1-cell.
  [[nodiscard]] Cell edge(std::size_t i) const {
    const LatticePoint& a = vertex(i);
    const LatticePoint& b = vertex(i + 1);
    const LatticePoint& lo = std::min(a, b);
    const auto d = Direction::between(a, b);
    if (!d) throw ParameterError("knot edge " + std::to_string(i) + " is not a unit step");
    return {lo, static_cast<std::uint8_t>(1U << d->axis)};
  }

  // Vertex sequence starting at the lexicographically smallest vertex and
  // heading to its smaller neighbor. Equal iff the polygons are equal.
  [[nodiscard]] std::vector<LatticePoint> canonical_vertices() const {
    const std::size_t n = vertices_.size();
    if (n == 0) return {};
    const std::size_t start =
        static_cast<std::size_t>(std::min_element(vertices_.begin(), vertices_.end()) - vertices_.begin());
    const bool forward = n < 2 || vertex(start + 1) <= vertex(start + n - 1);
    std::vector<LatticePoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(forward ? vertex(start + i) : vertex(start + n - i));
    return out;
  }

  friend bool operator==(const CubicalKnot& a, const CubicalKnot& b) {
    return a.scale_exp_ == b.scale_exp_ && a.canonical_vertices() == b.canonical_vertices();
  }

 private:
  std::vector<LatticePoint> vertices_;
  int scale_exp_ = 0;
};

enum class KnotViolation { none, wrong_dimension, too_short, non_unit_step, repeated_vertex, repeated_edge };

inline std::string to_string(KnotViolation v) {
  switch (v) {
    case KnotViolation::none: return "none";
    case KnotViolation::wrong_dimension: return "wrong dimension";
    case KnotViolation::too_short: return "too short";
    case KnotViolation::non_unit_step: return "non-unit step";
    case KnotViolation::repeated_vertex: return "self-intersection";
    case KnotViolation::repeated_edge: return "repeated edge";
  }
  return "unknown";
}

struct KnotValidation {
  KnotViolation violation = KnotViolation::none;
  std::size_t index = 0;  // offending vertex or edge index
  std::string message;

  [[nodiscard]] bool ok() const { return violation == KnotViolation::none; }
  explicit operator bool() const { return ok(); }
};

inline KnotValidation validate(const CubicalKnot& knot) {
  const auto& v = knot.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].dim() != 3) {
      return {KnotViolation::wrong_dimension, i, "vertex " + std::to_string(i) + " is not a point of Z^3"};
    }
  }
  if (v.size() < 4) {
    return {KnotViolation::too_short, v.size(), "closed lattice polygon needs at least 4 edges, got " + std::to_string(v.size())};
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t j = (i + 1) % v.size();
    if (!Direction::between(v[i], v[j])) {
      return {KnotViolation::non_unit_step, i,
              "open path: vertices " + std::to_string(i) + " " + v[i].to_string() + " and " + std::to_string(j) + " " +
                  v[j].to_string() + " are not one unit step apart"};
    }
  }
  std::unordered_set<LatticePoint> seen;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!seen.insert(v[i]).second) {
      return {KnotViolation::repeated_vertex, i, "self-intersection at vertex " + std::to_string(i) + " " + v[i].to_string()};
    }
  }
  std::unordered_set<Cell> edges;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!edges.insert(knot.edge(i)).second) {
      return {KnotViolation::repeated_edge, i, "repeated edge " + std::to_string(i) + " " + knot.edge(i).to_string()};
    }
  }
  return {};
}

// 3-adic valuation: the exponent of 3 in `factor`.
inline int triadic_valuation(Coord factor) {
  int v = 0;
  while (factor % 3 == 0) {
    factor /= 3;
    ++v;
  }
  return v;
}

// Multiplies every vertex by `factor` and subdivides each edge into `factor`
// unit edges. The scale exponent grows by the power of 3 in `factor`.
inline CubicalKnot scale(const CubicalKnot& knot, Coord factor) {
  if (factor < 1) throw ParameterError("scale factor must be a positive integer");
  const auto& v = knot.vertices();
  std::vector<LatticePoint> out;
  out.reserve(v.size() * static_cast<std::size_t>(factor));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const LatticePoint a = factor * v[i];
    const LatticePoint step = v[(i + 1) % v.size()] - v[i];
    for (Coord j = 0; j < factor; ++j) out.push_back(a + j * step);
  }
  return {std::move(out), knot.scale_exp() + triadic_valuation(factor)};
}

inline CubicalKnot translate(const CubicalKnot& knot, const LatticePoint& offset) {
  std::vector<LatticePoint> out;
  out.reserve(knot.size());
  for (const auto& p : knot.vertices()) out.push_back(p + offset);
  return {std::move(out), knot.scale_exp()};
}

// True iff every vertex lies in [0, 3^scale_exp]^3.
inline bool fits_domain(const CubicalKnot& knot) {
  const Coord side = pow3(knot.scale_exp());
  return std::all_of(knot.vertices().begin(), knot.vertices().end(), [&](const LatticePoint& p) {
    for (int i = 0; i < 3; ++i) {
      if (p[i] < 0 || p[i] > side) return false;
    }
    return true;
  });
}

enum class MoveKind { spike, unspike, slide };

inline std::string to_string(MoveKind k) {
  switch (k) {
    case MoveKind::spike: return "spike";
    case MoveKind::unspike: return "unspike";
    case MoveKind::slide: return "slide";
  }
  return "unknown";
}

inline MoveKind parse_move_kind(const std::string& s) {
  if (s == "spike") return MoveKind::spike;
  if (s == "unspike") return MoveKind::unspike;
  if (s == "slide") return MoveKind::slide;
  throw FormatError("unknown move kind '" + s + "'");
}

// One elementary move with anchor u, edge direction a and push direction w:
//   spike    edge u,u+a                  -> path u,u+w,u+a+w,u+a
//   unspike  path u,u+w,u+a+w,u+a        -> edge u,u+a
//   slide    path u,u+a,u+a+w            -> path u,u+w,u+a+w
// Paths may be traversed in either orientation. The swept square is always
// {u, u+a, u+w, u+a+w}.
struct MoveRecord {
  MoveKind kind = MoveKind::spike;
  LatticePoint anchor;
  Direction edge;
  Direction push;

  [[nodiscard]] Cell swept_square() const {
    LatticePoint lo = anchor;
    if (edge.sign < 0) lo[edge.axis] -= 1;
    if (push.sign < 0) lo[push.axis] -= 1;
    return {lo, static_cast<std::uint8_t>((1U << edge.axis) | (1U << push.axis))};
  }

  [[nodiscard]] MoveRecord inverse() const {
    switch (kind) {
      case MoveKind::spike: return {MoveKind::unspike, anchor, edge, push};
      case MoveKind::unspike: return {MoveKind::spike, anchor, edge, push};
      case MoveKind::slide: return {MoveKind::slide, anchor, push, edge};
    }
    return *this;
  }

  [[nodiscard]] std::string to_string() const {
    return menger_knots::to_string(kind) + " " + anchor.to_string() + " " + edge.to_string() + " " + push.to_string();
  }

  friend bool operator==(const MoveRecord&, const MoveRecord&) = default;
};

// On the integer lattice an edge can only meet a unit square along its
// boundary, so every obstruction shows up as an occupied vertex.
enum class Obstruction { none, invalid_directions, missing_segment, occupied_vertex, too_short };

inline std::string to_string(Obstruction o) {
  switch (o) {
    case Obstruction::none: return "none";
    case Obstruction::invalid_directions: return "invalid directions";
    case Obstruction::missing_segment: return "segment not on knot";
    case Obstruction::occupied_vertex: return "occupied vertex";
    case Obstruction::too_short: return "knot too short";
  }
  return "unknown";
}

struct MoveCheck {
  Obstruction obstruction = Obstruction::none;
  std::string detail;

  [[nodiscard]] bool ok() const { return obstruction == Obstruction::none; }
  explicit operator bool() const { return ok(); }
};

class IllegalMoveError : public std::runtime_error {
 public:
  IllegalMoveError(MoveRecord move, MoveCheck check)
      : std::runtime_error("illegal " + move.to_string() + ": " + to_string(check.obstruction) +
                           (check.detail.empty() ? "" : " (" + check.detail + ")")),
        move_(std::move(move)),
        check_(std::move(check)) {}

  [[nodiscard]] const MoveRecord& move() const { return move_; }
  [[nodiscard]] Obstruction obstruction() const { return check_.obstruction; }

 private:
  MoveRecord move_;
  MoveCheck check_;
};

namespace detail {

// Applies `mv` to the vertex sequence `seq` (cyclic when `closed`). Vertices
// of the knot that are not in `seq` are reported by `occupied`. On an open
// sequence the first and last vertices never move. Leaves `seq` untouched
// when the move is illegal.
template <class Occupied>
MoveCheck apply_move_in_place(std::vector<LatticePoint>& seq, bool closed, const MoveRecord& mv, Occupied&& occupied) {
  if (mv.edge.axis == mv.push.axis || mv.anchor.dim() != 3) {
    return {Obstruction::invalid_directions, "edge and push directions must be distinct axes"};
  }
  const std::size_t n = seq.size();
  const LatticePoint u = mv.anchor;
  const LatticePoint a = mv.edge.vec();
  const LatticePoint w = mv.push.vec();

  const auto find = [&](const LatticePoint& p) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < n; ++i) {
      if (seq[i] == p) return i;
    }
    return std::nullopt;
  };
  const auto free_vertex = [&](const LatticePoint& p) { return !find(p) && !occupied(p); };
  // Index of the vertex `steps` positions from i in direction dir (+1/-1),
  // or nullopt when that walks off an open sequence.
  const auto at = [&](std::size_t i, int dir, std::size_t steps) -> std::optional<std::size_t> {
    const auto si = static_cast<std::ptrdiff_t>(i) + dir * static_cast<std::ptrdiff_t>(steps);
    if (closed) return static_cast<std::size_t>(((si % static_cast<std::ptrdiff_t>(n)) + static_cast<std::ptrdiff_t>(n)) % static_cast<std::ptrdiff_t>(n));
    if (si < 0 || si >= static_cast<std::ptrdiff_t>(n)) return std::nullopt;
    return static_cast<std::size_t>(si);
  };
  // Orientation (+1 or -1) in which `pattern` follows from index i, or 0.
  const auto follows = [&](std::size_t i, const std::vector<LatticePoint>& pattern) -> int {
    for (int dir : {1, -1}) {
      bool match = true;
      for (std::size_t s = 1; s < pattern.size() && match; ++s) {
        const auto j = at(i, dir, s);
        match = j && seq[*j] == pattern[s];
      }
      if (match) return dir;
    }
    return 0;
  };

  const auto ui = find(u);
  if (!ui) return {Obstruction::missing_segment, "anchor " + u.to_string() + " not on knot"};

  switch (mv.kind) {
    case MoveKind::spike: {
      const int dir = follows(*ui, {u, u + a});
      if (dir == 0) return {Obstruction::missing_segment, "no edge " + u.to_string() + "-" + (u + a).to_string()};
      const LatticePoint p1 = u + w;
      const LatticePoint p2 = u + a + w;
      if (!free_vertex(p1)) return {Obstruction::occupied_vertex, p1.to_string()};
      if (!free_vertex(p2)) return {Obstruction::occupied_vertex, p2.to_string()};
      if (dir > 0) {
        const auto pos = static_cast<std::ptrdiff_t>(*ui) + 1;
        seq.insert(seq.begin() + pos, {p1, p2});
      } else {
        // seq runs ..., u+a, u, ... ; insert between them. For a closed
        // sequence with u at index 0 the predecessor is the last element.
        if (*ui == 0) {
          seq.insert(seq.end(), {p2, p1});
        } else {
          seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(*ui), {p2, p1});
        }
      }
      return {};
    }
    case MoveKind::unspike: {
      const int dir = follows(*ui, {u, u + w, u + a + w, u + a});
      if (dir == 0) return {Obstruction::missing_segment, "no spike at " + u.to_string()};
      if (closed && n <= 4) return {Obstruction::too_short, "unspike would leave fewer than 4 edges"};
      std::size_t i1 = *at(*ui, dir, 1);
      std::size_t i2 = *at(*ui, dir, 2);
      if (i1 < i2) std::swap(i1, i2);
      seq.erase(seq.begin() + static_cast<std::ptrdiff_t>(i1));
      seq.erase(seq.begin() + static_cast<std::ptrdiff_t>(i2));
      return {};
    }
    case MoveKind::slide: {
      const int dir = follows(*ui, {u, u + a, u + a + w});
      if (dir == 0) return {Obstruction::missing_segment, "no corner at " + (u + a).to_string()};
      const LatticePoint target = u + w;
      if (!free_vertex(target)) return {Obstruction::occupied_vertex, target.to_string()};
      seq[*at(*ui, dir, 1)] = target;
      return {};
    }
  }
  return {Obstruction::invalid_directions, "unknown move kind"};
}

}  // namespace detail

inline MoveCheck check_move(const CubicalKnot& knot, const MoveRecord& move) {
  std::vector<LatticePoint> seq = knot.vertices();
  return detail::apply_move_in_place(seq, true, move, [](const LatticePoint&) { return false; });
}

// Applies a legal move; throws IllegalMoveError naming the obstruction otherwise.
inline CubicalKnot apply_move(const CubicalKnot& knot, const MoveRecord& move) {
  std::vector<LatticePoint> seq = knot.vertices();
  MoveCheck check = detail::apply_move_in_place(seq, true, move, [](const LatticePoint&) { return false; });
  if (!check) throw IllegalMoveError(move, std::move(check));
  return {std::move(seq), knot.scale_exp()};
}

// Every edge of a domain-bound knot lies in a retained depth-k cube of
// M^3_n(k), with the depth-k grid rescaled to the knot's lattice.
inline bool knot_in_approximant(const CubicalKnot& knot, const MengerParams& params) {
  params.check();
  if (params.m != 3) throw ParameterError("knots live in m = 3");
  if (params.k > knot.scale_exp()) {
    throw ParameterError("depth k=" + std::to_string(params.k) + " exceeds knot scale " + std::to_string(knot.scale_exp()));
  }
  if (!fits_domain(knot)) throw ParameterError("knot does not fit [0, 3^" + std::to_string(knot.scale_exp()) + "]^3");
  for (std::size_t i = 0; i < knot.size(); ++i) {
    if (!cell_contained_at_depth(knot.edge(i), knot.scale_exp(), params.k, params.n)) return false;
  }
  return true;
}

}  // namespace menger_knots
