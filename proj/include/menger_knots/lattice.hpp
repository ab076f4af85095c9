#pragma once

// Integer-lattice geometry for the canonical cubulation of R^m: points,
// axis-aligned cells of every dimension, incidence, and base-3 addresses of
// triadic subcubes. Everything is exact integer arithmetic.

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

#ifndef MENGER_KNOTS_MAX_DIM
#define MENGER_KNOTS_MAX_DIM 6
#endif

namespace menger_knots {

using Coord = std::int64_t;

inline constexpr int kMaxDim = MENGER_KNOTS_MAX_DIM;
static_assert(kMaxDim >= 2 && kMaxDim <= 8, "axis sets are stored in a byte");

inline void check_dimension(int m) {
  if (m < 1 || m > kMaxDim) {
    throw ParameterError("dimension " + std::to_string(m) + " outside [1, " +
                         std::to_string(kMaxDim) + "]");
  }
}

// 3^k as an exact integer. Throws once the value no longer fits in a Coord.
inline Coord pow3(int k) {
  if (k < 0) throw ParameterError("negative exponent");
  Coord v = 1;
  for (int i = 0; i < k; ++i) {
    if (v > std::numeric_limits<Coord>::max() / 3) {
      throw ResourceError("3^" + std::to_string(k) + " overflows 64-bit coordinates");
    }
    v *= 3;
  }
  return v;
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

// A point of Z^m with m fixed per value. Unused trailing slots stay zero so
// the defaulted comparison is lexicographic on the live coordinates.
class LatticePoint {
 public:
  LatticePoint() = default;

  explicit LatticePoint(int dim) : dim_(static_cast<std::uint8_t>(dim)) { check_dimension(dim); }

  LatticePoint(std::initializer_list<Coord> coords) : LatticePoint(static_cast<int>(coords.size())) {
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  explicit LatticePoint(std::span<const Coord> coords) : LatticePoint(static_cast<int>(coords.size())) {
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] Coord operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  Coord& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] std::span<const Coord> coords() const { return {c_.data(), dim_}; }

  friend LatticePoint operator+(LatticePoint a, const LatticePoint& b) {
    for (int i = 0; i < a.dim(); ++i) a[i] += b[i];
    return a;
  }
  friend LatticePoint operator-(LatticePoint a, const LatticePoint& b) {
    for (int i = 0; i < a.dim(); ++i) a[i] -= b[i];
    return a;
  }
  friend LatticePoint operator*(Coord s, LatticePoint a) {
    for (int i = 0; i < a.dim(); ++i) a[i] *= s;
    return a;
  }

  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;

  [[nodiscard]] std::string to_string() const {
    std::string s = "(";
    for (int i = 0; i < dim(); ++i) {
      if (i) s += ",";
      s += std::to_string(c_[static_cast<std::size_t>(i)]);
    }
    return s + ")";
  }

  [[nodiscard]] static LatticePoint unit(int dim, int axis, int sign = 1) {
    LatticePoint p(dim);
    p[axis] = sign;
    return p;
  }

 private:
  std::array<Coord, kMaxDim> c_{};
  std::uint8_t dim_ = 0;
};

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(p.dim());
    for (Coord c : p.coords()) {
      h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

// Axis-aligned closed cell corner + [0,1]^axes x {0}^others. The corner is the
// minimal vertex and the axis set is a bitmask, so the representation is
// canonical: equal cells compare equal.
class Cell {
 public:
  Cell() = default;

  Cell(LatticePoint corner, std::uint8_t axis_mask) : corner_(std::move(corner)), axes_(axis_mask) {
    if (corner_.dim() < 8 && (axes_ >> corner_.dim()) != 0) {
      throw ParameterError("cell axis outside ambient dimension");
    }
  }

  Cell(LatticePoint corner, std::initializer_list<int> axes) : corner_(std::move(corner)) {
    for (int a : axes) {
      if (a < 0 || a >= corner_.dim()) throw ParameterError("cell axis outside ambient dimension");
      const auto bit = static_cast<std::uint8_t>(1U << a);
      if (axes_ & bit) throw ParameterError("repeated cell axis");
      axes_ |= bit;
    }
  }

  // The full m-cube with the given corner.
  static Cell cube(LatticePoint corner) {
    const auto mask = static_cast<std::uint8_t>((1U << corner.dim()) - 1U);
    return {std::move(corner), mask};
  }

  [[nodiscard]] const LatticePoint& corner() const { return corner_; }
  [[nodiscard]] std::uint8_t axis_mask() const { return axes_; }
  [[nodiscard]] int ambient_dim() const { return corner_.dim(); }
  [[nodiscard]] int dim() const { return std::popcount(axes_); }
  [[nodiscard]] bool spans(int axis) const { return (axes_ >> axis) & 1U; }

  [[nodiscard]] std::vector<int> axes() const {
    std::vector<int> out;
    for (int a = 0; a < ambient_dim(); ++a) {
      if (spans(a)) out.push_back(a);
    }
    return out;
  }

  // Maximal vertex.
  [[nodiscard]] LatticePoint far_corner() const {
    LatticePoint p = corner_;
    for (int a = 0; a < ambient_dim(); ++a) {
      if (spans(a)) p[a] += 1;
    }
    return p;
  }

  friend auto operator<=>(const Cell&, const Cell&) = default;

  [[nodiscard]] std::string to_string() const {
    std::string s = corner_.to_string() + "+[";
    bool first = true;
    for (int a : axes()) {
      if (!first) s += ",";
      s += std::to_string(a);
      first = false;
    }
    return s + "]";
  }

 private:
  LatticePoint corner_;
  std::uint8_t axes_ = 0;
};

struct CellHash {
  std::size_t operator()(const Cell& c) const noexcept {
    return LatticePointHash{}(c.corner()) * 31U + c.axis_mask();
  }
};

namespace detail {

// Calls fn(mask) for every d-element subset of the bits set in `pool`, in
// increasing numeric order of the mask.
template <class Fn>
void for_each_submask(std::uint8_t pool, int d, Fn&& fn) {
  for (unsigned mask = 0; mask < 256U; ++mask) {
    if ((mask & ~static_cast<unsigned>(pool)) != 0U) continue;
    if (std::popcount(mask) != d) continue;
    fn(static_cast<std::uint8_t>(mask));
  }
}

}  // namespace detail

// All d-faces of `cell`, each once. Count is C(dim, d) * 2^(dim - d).
inline std::vector<Cell> faces(const Cell& cell, int d) {
  if (d < 0 || d > cell.dim()) {
    throw ParameterError("face dimension " + std::to_string(d) + " outside [0, " +
                         std::to_string(cell.dim()) + "]");
  }
  std::vector<Cell> out;
  out.reserve(binomial(cell.dim(), d) << (cell.dim() - d));
  detail::for_each_submask(cell.axis_mask(), d, [&](std::uint8_t kept) {
    const auto fixed = static_cast<std::uint8_t>(cell.axis_mask() & ~kept);
    const std::vector<int> fixed_axes = Cell(cell.corner(), fixed).axes();
    const unsigned combos = 1U << fixed_axes.size();
    for (unsigned bits = 0; bits < combos; ++bits) {
      LatticePoint corner = cell.corner();
      for (std::size_t i = 0; i < fixed_axes.size(); ++i) {
        if ((bits >> i) & 1U) corner[fixed_axes[i]] += 1;
      }
      out.emplace_back(std::move(corner), kept);
    }
  });
  return out;
}

// All d-cells of the canonical cubulation of R^m that contain `cell`.
// Count is C(m - dim, d - dim) * 2^(d - dim).
inline std::vector<Cell> incident_cells(const Cell& cell, int d, int m) {
  check_dimension(m);
  if (m != cell.ambient_dim()) throw ParameterError("cell dimension does not match ambient dimension");
  if (d < cell.dim() || d > m) {
    throw ParameterError("incident dimension " + std::to_string(d) + " outside [" +
                         std::to_string(cell.dim()) + ", " + std::to_string(m) + "]");
  }
  const auto all = static_cast<std::uint8_t>((1U << m) - 1U);
  const auto free_axes = static_cast<std::uint8_t>(all & ~cell.axis_mask());
  std::vector<Cell> out;
  out.reserve(binomial(m - cell.dim(), d - cell.dim()) << (d - cell.dim()));
  detail::for_each_submask(free_axes, d - cell.dim(), [&](std::uint8_t added) {
    const std::vector<int> added_axes = Cell(cell.corner(), added).axes();
    const unsigned combos = 1U << added_axes.size();
    for (unsigned bits = 0; bits < combos; ++bits) {
      LatticePoint corner = cell.corner();
      for (std::size_t i = 0; i < added_axes.size(); ++i) {
        if ((bits >> i) & 1U) corner[added_axes[i]] -= 1;
      }
      out.emplace_back(std::move(corner), static_cast<std::uint8_t>(cell.axis_mask() | added));
    }
  });
  std::sort(out.begin(), out.end());
  return out;
}

// True iff `f` is a face of `c` (including f == c).
inline bool is_face_of(const Cell& f, const Cell& c) {
  if (f.ambient_dim() != c.ambient_dim()) return false;
  if ((f.axis_mask() & ~c.axis_mask()) != 0) return false;
  for (int a = 0; a < c.ambient_dim(); ++a) {
    const Coord lo = c.corner()[a];
    if (c.spans(a) && !f.spans(a)) {
      if (f.corner()[a] != lo && f.corner()[a] != lo + 1) return false;
    } else if (f.corner()[a] != lo) {
      return false;
    }
  }
  return true;
}

// One level of a triadic address: a base-3 digit per axis.
class DigitVector {
 public:
  DigitVector() = default;
  explicit DigitVector(int dim) : dim_(static_cast<std::uint8_t>(dim)) { check_dimension(dim); }
  DigitVector(std::initializer_list<int> digits) : DigitVector(static_cast<int>(digits.size())) {
    int i = 0;
    for (int d : digits) set(i++, d);
  }

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int operator[](int i) const { return d_[static_cast<std::size_t>(i)]; }
  void set(int i, int digit) {
    if (digit < 0 || digit > 2) throw ParameterError("base-3 digit out of range");
    d_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(digit);
  }

  // Number of digits equal to 1, i.e. axes along which the subcube is central.
  [[nodiscard]] int middle_count() const {
    int c = 0;
    for (int i = 0; i < dim(); ++i) c += d_[static_cast<std::size_t>(i)] == 1 ? 1 : 0;
    return c;
  }

  friend auto operator<=>(const DigitVector&, const DigitVector&) = default;

  [[nodiscard]] std::string to_string() const {
    std::string s;
    for (int i = 0; i < dim(); ++i) s += static_cast<char>('0' + d_[static_cast<std::size_t>(i)]);
    return s;
  }

 private:
  std::array<std::uint8_t, kMaxDim> d_{};
  std::uint8_t dim_ = 0;
};

// Nested base-3 address of a depth-k subcube of the unit hypercube. Level 0
// of `levels` is the coarsest subdivision.
class CubeAddress {
 public:
  CubeAddress() = default;
  explicit CubeAddress(int dim) : dim_(dim) { check_dimension(dim); }
  CubeAddress(int dim, std::vector<DigitVector> levels) : dim_(dim), levels_(std::move(levels)) {
    check_dimension(dim);
    for (const auto& l : levels_) {
      if (l.dim() != dim) throw ParameterError("address level has wrong dimension");
    }
  }

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int depth() const { return static_cast<int>(levels_.size()); }
  [[nodiscard]] const std::vector<DigitVector>& levels() const { return levels_; }
  [[nodiscard]] const DigitVector& level(int i) const { return levels_[static_cast<std::size_t>(i)]; }

  void push_back(const DigitVector& level) {
    if (level.dim() != dim_) throw ParameterError("address level has wrong dimension");
    levels_.push_back(level);
  }

  [[nodiscard]] CubeAddress prefix(int depth) const {
    return {dim_, std::vector<DigitVector>(levels_.begin(), levels_.begin() + depth)};
  }

  friend auto operator<=>(const CubeAddress&, const CubeAddress&) = default;

  // Levels joined by '/', e.g. "000/112"; the empty address prints as "".
  [[nodiscard]] std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      if (i) s += "/";
      s += levels_[i].to_string();
    }
    return s;
  }

  static CubeAddress parse(int dim, const std::string& text) {
    CubeAddress addr(dim);
    if (text.empty()) return addr;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = text.find('/', start);
      const std::string part = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
      if (static_cast<int>(part.size()) != dim) throw FormatError("address level '" + part + "' has wrong length");
      DigitVector dv(dim);
      for (int i = 0; i < dim; ++i) {
        const char ch = part[static_cast<std::size_t>(i)];
        if (ch < '0' || ch > '2') throw FormatError("address digit '" + std::string(1, ch) + "' is not base 3");
        dv.set(i, ch - '0');
      }
      addr.push_back(dv);
      if (end == std::string::npos) break;
      start = end + 1;
    }
    return addr;
  }

 private:
  int dim_ = 0;
  std::vector<DigitVector> levels_;
};

// Address of the depth-k cube whose minimal corner is `corner` at scale 3^k.
inline CubeAddress address_of(const LatticePoint& corner, int k) {
  const Coord side = pow3(k);
  for (int i = 0; i < corner.dim(); ++i) {
    if (corner[i] < 0 || corner[i] >= side) {
      throw OutOfBoundsError("corner " + corner.to_string() + " outside [0, 3^" + std::to_string(k) + ")");
    }
  }
  std::vector<DigitVector> levels(static_cast<std::size_t>(k), DigitVector(corner.dim()));
  for (int i = 0; i < corner.dim(); ++i) {
    Coord v = corner[i];
    for (int level = k - 1; level >= 0; --level) {
      levels[static_cast<std::size_t>(level)].set(i, static_cast<int>(v % 3));
      v /= 3;
    }
  }
  return {corner.dim(), std::move(levels)};
}

// Minimal corner, at scale 3^depth, of the addressed cube.
inline LatticePoint cube_of(const CubeAddress& addr) {
  LatticePoint p(addr.dim());
  for (const auto& level : addr.levels()) {
    for (int i = 0; i < addr.dim(); ++i) p[i] = p[i] * 3 + level[i];
  }
  return p;
}

}  // namespace menger_knots

template <>
struct std::hash<menger_knots::LatticePoint> : menger_knots::LatticePointHash {};
template <>
struct std::hash<menger_knots::Cell> : menger_knots::CellHash {};
