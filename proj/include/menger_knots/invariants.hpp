#pragma once

// Knot-type evidence for cubical knots: exact projection to a crossing
// diagram and Fox p-coloring counts of that diagram.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "knot.hpp"
#include "lattice.hpp"

namespace menger_knots {

struct Crossing {
  int over = 0;       // arc passing over
  int under_in = 0;   // arc ending at the crossing
  int under_out = 0;  // arc starting at the crossing
  int sign = 0;       // +1 / -1
};

struct GaussEvent {
  int crossing = 0;  // index into KnotDiagram::crossings
  bool over = false;
};

struct KnotDiagram {
  std::vector<Crossing> crossings;
  int arcs = 1;
  std::vector<GaussEvent> gauss;  // traversal order from vertex 0

  [[nodiscard]] int writhe() const {
    int w = 0;
    for (const auto& c : crossings) w += c.sign;
    return w;
  }
};

// "O1+ U2- ..." followed by one "c<i>: over=<a> in=<b> out=<c> sign=<s>" line
// per crossing. Debug output only.
inline std::string gauss_code(const KnotDiagram& d) {
  std::ostringstream out;
  for (std::size_t i = 0; i < d.gauss.size(); ++i) {
    const auto& e = d.gauss[i];
    if (i) out << ' ';
    out << (e.over ? 'O' : 'U') << e.crossing + 1 << (d.crossings[static_cast<std::size_t>(e.crossing)].sign > 0 ? '+' : '-');
  }
  out << '\n';
  for (std::size_t i = 0; i < d.crossings.size(); ++i) {
    const auto& c = d.crossings[i];
    out << 'c' << i + 1 << ": over=" << c.over << " in=" << c.under_in << " out=" << c.under_out
        << " sign=" << (c.sign > 0 ? "+" : "-") << '\n';
  }
  return out.str();
}

class GenericityError : public std::runtime_error {
 public:
  GenericityError(std::size_t seg_a, std::size_t seg_b, const std::string& what)
      : std::runtime_error("non-generic projection at segments " + std::to_string(seg_a) + "/" + std::to_string(seg_b) +
                           ": " + what),
        a_(seg_a),
        b_(seg_b) {}
  [[nodiscard]] std::size_t segment_a() const { return a_; }
  [[nodiscard]] std::size_t segment_b() const { return b_; }

 private:
  std::size_t a_;
  std::size_t b_;
};

namespace detail {

using Wide = __int128;

struct Projected {
  Wide x = 0;
  Wide y = 0;
  Wide depth = 0;  // larger is closer to the viewer at +infinity * direction
};

inline Wide orient(const Projected& a, const Projected& b, const Projected& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline int sgn(Wide v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

// Exact rational in lowest-effort form: num/den with den > 0.
struct Ratio {
  Wide num = 0;
  Wide den = 1;
  friend bool operator<(const Ratio& a, const Ratio& b) { return a.num * b.den < b.num * a.den; }
  friend bool operator==(const Ratio& a, const Ratio& b) { return a.num * b.den == b.num * a.den; }
};

inline Ratio make_ratio(Wide num, Wide den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  return {num, den};
}

}  // namespace detail

// Projects along `direction` (viewer at +infinity * direction) and builds the
// crossing diagram. Throws GenericityError on any degeneracy: an edge parallel
// to the direction, collinear overlap, a crossing through a projected vertex,
// or a triple point.
inline KnotDiagram project(const CubicalKnot& knot, const LatticePoint& direction) {
  using detail::Projected;
  using detail::Ratio;
  using detail::Wide;
  if (direction.dim() != 3 || (direction[0] == 0 && direction[1] == 0 && direction[2] == 0)) {
    throw ParameterError("projection direction must be a nonzero 3-vector");
  }
  const auto cross = [](const std::array<Wide, 3>& a, const std::array<Wide, 3>& b) {
    return std::array<Wide, 3>{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  };
  const std::array<Wide, 3> d{direction[0], direction[1], direction[2]};
  std::array<Wide, 3> e1 = cross(d, {1, 0, 0});
  if (e1[0] == 0 && e1[1] == 0 && e1[2] == 0) e1 = cross(d, {0, 1, 0});
  const std::array<Wide, 3> e2 = cross(d, e1);  // e1 x e2 is a positive multiple of d

  const std::size_t n = knot.size();
  std::vector<Projected> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = knot.vertex(i);
    const std::array<Wide, 3> q{p[0], p[1], p[2]};
    pts[i] = {q[0] * e1[0] + q[1] * e1[1] + q[2] * e1[2], q[0] * e2[0] + q[1] * e2[1] + q[2] * e2[2],
              q[0] * d[0] + q[1] * d[1] + q[2] * d[2]};
  }
  const auto seg_a = [&](std::size_t i) -> const Projected& { return pts[i]; };
  const auto seg_b = [&](std::size_t i) -> const Projected& { return pts[(i + 1) % n]; };

  for (std::size_t i = 0; i < n; ++i) {
    if (seg_a(i).x == seg_b(i).x && seg_a(i).y == seg_b(i).y) throw GenericityError(i, i, "edge parallel to direction");
  }

  struct RawCrossing {
    std::size_t seg_i;
    Ratio t_i;
    std::size_t seg_j;
    Ratio t_j;
    bool i_over;
  };
  std::vector<RawCrossing> raw;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Projected& a = seg_a(i);
      const Projected& b = seg_b(i);
      const Projected& c = seg_a(j);
      const Projected& e = seg_b(j);
      const Wide d1 = detail::orient(a, b, c);
      const Wide d2 = detail::orient(a, b, e);
      if (d1 == 0 && d2 == 0) {
        const Wide ux = b.x - a.x;
        const Wide uy = b.y - a.y;
        if (adjacent) {
          // Shared endpoint; fold-back would overlap.
          const Wide vx = e.x - c.x;
          const Wide vy = e.y - c.y;
          if (ux * vx + uy * vy < 0) throw GenericityError(i, j, "adjacent edges fold back");
          continue;
        }
        const auto along = [&](const Projected& p) { return (p.x - a.x) * ux + (p.y - a.y) * uy; };
        const Wide len = along(b);
        const Wide lo = std::min(along(c), along(e));
        const Wide hi = std::max(along(c), along(e));
        if (hi < 0 || lo > len) continue;
        throw GenericityError(i, j, "collinear overlap");
      }
      if (adjacent) continue;
      if (detail::sgn(d1) * detail::sgn(d2) > 0) continue;
      const Wide d3 = detail::orient(c, e, a);
      const Wide d4 = detail::orient(c, e, b);
      if (detail::sgn(d3) * detail::sgn(d4) > 0) continue;
      if (d1 == 0 || d2 == 0 || d3 == 0 || d4 == 0) throw GenericityError(i, j, "crossing through a projected vertex");
      const Ratio ti = detail::make_ratio(d3, d3 - d4);
      const Ratio tj = detail::make_ratio(d1, d1 - d2);
      // depth at the crossing: a.depth + t (b.depth - a.depth), compared exactly
      const Wide zi = a.depth * ti.den + ti.num * (b.depth - a.depth);
      const Wide zj = c.depth * tj.den + tj.num * (e.depth - c.depth);
      const Wide lhs = zi * tj.den;
      const Wide rhs = zj * ti.den;
      if (lhs == rhs) throw GenericityError(i, j, "segments intersect in space");
      raw.push_back({i, ti, j, tj, lhs > rhs});
    }
  }

  KnotDiagram diagram;
  if (raw.empty()) return diagram;

  struct Event {
    Ratio t;
    std::size_t raw_index;
    bool over;
  };
  std::vector<std::vector<Event>> per_segment(n);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    per_segment[raw[k].seg_i].push_back({raw[k].t_i, k, raw[k].i_over});
    per_segment[raw[k].seg_j].push_back({raw[k].t_j, k, !raw[k].i_over});
  }
  std::vector<Event> sequence;
  for (std::size_t i = 0; i < n; ++i) {
    auto& ev = per_segment[i];
    std::sort(ev.begin(), ev.end(), [](const Event& x, const Event& y) { return x.t < y.t; });
    for (std::size_t q = 1; q < ev.size(); ++q) {
      if (ev[q].t == ev[q - 1].t) throw GenericityError(i, i, "triple point");
    }
    sequence.insert(sequence.end(), ev.begin(), ev.end());
  }

  // Crossings are numbered by first appearance along the traversal. Arc ids
  // advance at each under-passage modulo the arc count, so the stretch after
  // the last under-passage wraps to arc 0, the same arc the walk started on.
  std::vector<int> number(raw.size(), -1);
  int next_number = 0;
  for (const auto& e : sequence) {
    if (number[e.raw_index] < 0) number[e.raw_index] = next_number++;
  }
  diagram.crossings.assign(raw.size(), Crossing{});
  std::vector<int> over_arc(raw.size(), -1);
  int arc = 0;
  int unders = 0;
  for (const auto& e : sequence) unders += e.over ? 0 : 1;
  diagram.arcs = unders;
  for (const auto& e : sequence) {
    const auto c = static_cast<std::size_t>(number[e.raw_index]);
    if (e.over) {
      over_arc[c] = arc;
    } else {
      diagram.crossings[c].under_in = arc;
      arc = (arc + 1) % unders;
      diagram.crossings[c].under_out = arc;
    }
    diagram.gauss.push_back({static_cast<int>(c), e.over});
  }
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const auto c = static_cast<std::size_t>(number[k]);
    diagram.crossings[c].over = over_arc[c];
    // Sign from the projected tangents of the over and under strands.
    const std::size_t over_seg = raw[k].i_over ? raw[k].seg_i : raw[k].seg_j;
    const std::size_t under_seg = raw[k].i_over ? raw[k].seg_j : raw[k].seg_i;
    const Projected o{seg_b(over_seg).x - seg_a(over_seg).x, seg_b(over_seg).y - seg_a(over_seg).y, 0};
    const Projected u{seg_b(under_seg).x - seg_a(under_seg).x, seg_b(under_seg).y - seg_a(under_seg).y, 0};
    diagram.crossings[c].sign = detail::sgn(o.x * u.y - o.y * u.x);
  }
  return diagram;
}

inline bool is_odd_prime(int p) {
  if (p < 3 || p % 2 == 0) return false;
  for (int q = 3; q * q <= p; q += 2) {
    if (p % q == 0) return false;
  }
  return true;
}

// Dimension over Z/p of the solution space of 2*over - in - out = 0.
inline int fox_nullity(const KnotDiagram& diagram, int p) {
  if (!is_odd_prime(p)) throw ParameterError("Fox colorings need an odd prime, got " + std::to_string(p));
  const int cols = diagram.arcs;
  std::vector<std::vector<std::int64_t>> rows;
  rows.reserve(diagram.crossings.size());
  for (const auto& c : diagram.crossings) {
    std::vector<std::int64_t> r(static_cast<std::size_t>(cols), 0);
    r[static_cast<std::size_t>(c.over)] += 2;
    r[static_cast<std::size_t>(c.under_in)] -= 1;
    r[static_cast<std::size_t>(c.under_out)] -= 1;
    for (auto& x : r) x = ((x % p) + p) % p;
    rows.push_back(std::move(r));
  }
  const auto inverse = [p](std::int64_t a) {
    std::int64_t result = 1;
    std::int64_t base = a % p;
    for (int e = p - 2; e > 0; e >>= 1) {
      if (e & 1) result = result * base % p;
      base = base * base % p;
    }
    return result;
  };
  int rank = 0;
  for (int col = 0; col < cols && rank < static_cast<int>(rows.size()); ++col) {
    std::size_t pivot = static_cast<std::size_t>(rank);
    while (pivot < rows.size() && rows[pivot][static_cast<std::size_t>(col)] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[static_cast<std::size_t>(rank)]);
    auto& pr = rows[static_cast<std::size_t>(rank)];
    const std::int64_t inv = inverse(pr[static_cast<std::size_t>(col)]);
    for (auto& x : pr) x = x * inv % p;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == static_cast<std::size_t>(rank)) continue;
      const std::int64_t f = rows[r][static_cast<std::size_t>(col)];
      if (f == 0) continue;
      for (std::size_t q = 0; q < static_cast<std::size_t>(cols); ++q) {
        rows[r][q] = ((rows[r][q] - f * pr[q]) % p + p) % p;
      }
    }
    ++rank;
  }
  return cols - rank;
}

inline std::uint64_t fox_colorings(const KnotDiagram& diagram, int p) {
  const int nullity = fox_nullity(diagram, p);
  std::uint64_t count = 1;
  for (int i = 0; i < nullity; ++i) {
    if (count > UINT64_MAX / static_cast<std::uint64_t>(p)) throw ResourceError("coloring count overflows 64 bits");
    count *= static_cast<std::uint64_t>(p);
  }
  return count;
}

struct InvariantReport {
  std::map<int, std::uint64_t> colorings;  // prime -> count
  LatticePoint direction;
  int attempts = 0;
  std::size_t crossings = 0;
};

inline constexpr int kMaxProjectionAttempts = 64;

// Direction candidates for a seed: integer vectors with entries in [-9, 9],
// drawn from mt19937_64 so the sequence is fixed for a given seed.
inline LatticePoint projection_direction(std::mt19937_64& rng) {
  while (true) {
    LatticePoint d(3);
    for (int i = 0; i < 3; ++i) d[i] = static_cast<Coord>(rng() % 19) - 9;
    if (d[0] != 0 || d[1] != 0 || d[2] != 0) return d;
  }
}

inline InvariantReport invariant_report(const CubicalKnot& knot, const std::vector<int>& primes, std::uint64_t seed = 0) {
  for (int p : primes) {
    if (!is_odd_prime(p)) throw ParameterError("Fox colorings need odd primes, got " + std::to_string(p));
  }
  std::mt19937_64 rng(seed);
  std::string last_error;
  for (int attempt = 1; attempt <= kMaxProjectionAttempts; ++attempt) {
    const LatticePoint d = projection_direction(rng);
    try {
      const KnotDiagram diagram = project(knot, d);
      InvariantReport report;
      report.direction = d;
      report.attempts = attempt;
      report.crossings = diagram.crossings.size();
      for (int p : primes) report.colorings[p] = fox_colorings(diagram, p);
      return report;
    } catch (const GenericityError& e) {
      last_error = e.what();
    }
  }
  throw GenericityError(0, 0, "no generic direction in " + std::to_string(kMaxProjectionAttempts) + " attempts; last: " + last_error);
}

}  // namespace menger_knots
