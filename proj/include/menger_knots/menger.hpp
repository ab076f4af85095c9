#pragma once

// Menger M^m_n approximants on triadic addresses. A depth-k subcube survives
// iff at every level its digit vector has at most n middle (== 1) digits,
// which is exactly "meets an n-face of the parent cube".

#include <cstdint>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"
#include "lattice.hpp"

namespace menger_knots {

using BigInt = boost::multiprecision::cpp_int;

struct MengerParams {
  int m = 3;
  int n = 1;
  int k = 0;

  void check() const {
    if (m < 2 || m > kMaxDim) {
      throw ParameterError("ambient dimension m=" + std::to_string(m) + " outside [2, " + std::to_string(kMaxDim) + "]");
    }
    if (n < 0 || n >= m) throw ParameterError("skeleton dimension n=" + std::to_string(n) + " outside [0, m)");
    if (k < 0) throw ParameterError("depth k must be non-negative");
  }

  friend bool operator==(const MengerParams&, const MengerParams&) = default;
};

inline bool touches_n_skeleton(const DigitVector& digits, int n) { return digits.middle_count() <= n; }

inline bool is_retained(const CubeAddress& addr, int n) {
  for (const auto& level : addr.levels()) {
    if (!touches_n_skeleton(level, n)) return false;
  }
  return true;
}

// Retained subcubes per parent: sum_{j<=n} C(m,j) 2^(m-j).
inline std::uint64_t retained_per_step(int m, int n) {
  std::uint64_t r = 0;
  for (int j = 0; j <= n; ++j) r += binomial(m, j) << (m - j);
  return r;
}

inline BigInt retained_count(const MengerParams& params) {
  params.check();
  return boost::multiprecision::pow(BigInt(retained_per_step(params.m, params.n)), static_cast<unsigned>(params.k));
}

inline BigInt total_count(const MengerParams& params) {
  params.check();
  return boost::multiprecision::pow(BigInt(3), static_cast<unsigned>(params.m * params.k));
}

struct RetentionReport {
  MengerParams params;
  BigInt retained_count;
  BigInt removed_count;
};

inline RetentionReport retention_report(const MengerParams& params) {
  RetentionReport r{params, retained_count(params), 0};
  r.removed_count = total_count(params) - r.retained_count;
  return r;
}

// All 3^m digit vectors in lexicographic order.
inline std::vector<DigitVector> all_digit_vectors(int m) {
  check_dimension(m);
  std::vector<DigitVector> out;
  const Coord count = pow3(m);
  out.reserve(static_cast<std::size_t>(count));
  for (Coord code = 0; code < count; ++code) {
    DigitVector dv(m);
    Coord v = code;
    for (int i = m - 1; i >= 0; --i) {
      dv.set(i, static_cast<int>(v % 3));
      v /= 3;
    }
    out.push_back(dv);
  }
  return out;
}

// Lazy, lexicographically ordered range over the retained depth-k addresses.
// Iteration is an odometer over the retained digit vectors of each level.
class RetainedCubes {
 public:
  explicit RetainedCubes(const MengerParams& params) : params_(params) {
    params_.check();
    for (const auto& dv : all_digit_vectors(params_.m)) {
      if (touches_n_skeleton(dv, params_.n)) good_.push_back(dv);
    }
  }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = CubeAddress;
    using difference_type = std::ptrdiff_t;
    using pointer = const CubeAddress*;
    using reference = const CubeAddress&;

    iterator() = default;

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }

    iterator& operator++() {
      advance();
      return *this;
    }
    void operator++(int) { advance(); }

    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_; }

   private:
    friend class RetainedCubes;

    iterator(const RetainedCubes* owner, bool done) : owner_(owner), done_(done) {
      if (done_) return;
      const int k = owner_->params_.k;
      digits_.assign(static_cast<std::size_t>(k), 0);
      current_ = CubeAddress(owner_->params_.m);
      for (int i = 0; i < k; ++i) current_.push_back(owner_->good_.front());
    }

    void advance() {
      const auto& good = owner_->good_;
      for (int level = static_cast<int>(digits_.size()) - 1; level >= 0; --level) {
        auto& d = digits_[static_cast<std::size_t>(level)];
        if (++d < good.size()) {
          rebuild(level);
          return;
        }
        d = 0;
      }
      done_ = true;
    }

    void rebuild(int from) {
      std::vector<DigitVector> levels(current_.levels().begin(), current_.levels().begin() + from);
      for (std::size_t i = static_cast<std::size_t>(from); i < digits_.size(); ++i) {
        levels.push_back(owner_->good_[digits_[i]]);
      }
      current_ = CubeAddress(owner_->params_.m, std::move(levels));
    }

    const RetainedCubes* owner_ = nullptr;
    bool done_ = true;
    std::vector<std::size_t> digits_;
    CubeAddress current_;
  };

  [[nodiscard]] iterator begin() const { return iterator(this, false); }
  [[nodiscard]] iterator end() const { return iterator(this, true); }

  [[nodiscard]] const MengerParams& params() const { return params_; }

 private:
  MengerParams params_;
  std::vector<DigitVector> good_;
};

inline RetainedCubes enumerate_retained(const MengerParams& params) { return RetainedCubes(params); }

// Counts retained depth-k addresses by testing every one of the 3^(mk)
// addresses. Refuses when 3^(mk) exceeds `cap`.
inline std::uint64_t count_retained_exhaustive(const MengerParams& params, std::uint64_t cap) {
  params.check();
  if (total_count(params) > BigInt(cap)) {
    throw ResourceError("3^(m*k) = " + total_count(params).str() + " exceeds enumeration cap " + std::to_string(cap));
  }
  const Coord side = pow3(params.k);
  std::uint64_t count = 0;
  LatticePoint corner(params.m);
  const auto total = static_cast<std::uint64_t>(total_count(params));
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t v = code;
    for (int i = params.m - 1; i >= 0; --i) {
      corner[i] = static_cast<Coord>(v % static_cast<std::uint64_t>(side));
      v /= static_cast<std::uint64_t>(side);
    }
    if (is_retained(address_of(corner, params.k), params.n)) ++count;
  }
  return count;
}

// Per-axis base-3 digits of a coordinate in [0, 3^k), coarsest first.
inline void coordinate_digits(Coord v, int k, std::vector<int>& out) {
  out.assign(static_cast<std::size_t>(k), 0);
  for (int level = k - 1; level >= 0; --level) {
    out[static_cast<std::size_t>(level)] = static_cast<int>(v % 3);
    v /= 3;
  }
}

// Retention of the depth-k cube with the given corner (scale 3^k).
inline bool corner_retained(const LatticePoint& corner, int k, int n) {
  return is_retained(address_of(corner, k), n);
}

// Finds a retained depth-k cube containing `cell`, where `cell` lives on the
// finer lattice of scale 3^s (s >= k). Candidates are visited in
// lexicographic corner order; the first retained one is returned.
inline std::optional<CubeAddress> find_containing_cube(const Cell& cell, int s, int k, int n) {
  if (k > s || k < 0) throw ParameterError("depth k=" + std::to_string(k) + " outside [0, s=" + std::to_string(s) + "]");
  const int m = cell.ambient_dim();
  const Coord extent = pow3(s);
  const Coord side = pow3(s - k);
  const Coord cubes_per_axis = pow3(k);
  const LatticePoint far = cell.far_corner();
  std::vector<std::vector<Coord>> choices(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    const Coord lo = cell.corner()[a];
    if (lo < 0 || far[a] > extent) {
      throw OutOfBoundsError("cell " + cell.to_string() + " outside [0, 3^" + std::to_string(s) + "]^" + std::to_string(m));
    }
    auto& c = choices[static_cast<std::size_t>(a)];
    if (cell.spans(a)) {
      c.push_back(lo / side);
    } else if (lo % side == 0) {
      if (lo / side - 1 >= 0) c.push_back(lo / side - 1);
      if (lo / side < cubes_per_axis) c.push_back(lo / side);
    } else {
      c.push_back(lo / side);
    }
  }
  std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
  while (true) {
    LatticePoint corner(m);
    for (int a = 0; a < m; ++a) corner[a] = choices[static_cast<std::size_t>(a)][idx[static_cast<std::size_t>(a)]];
    CubeAddress addr = address_of(corner, k);
    if (is_retained(addr, n)) return addr;
    int a = m - 1;
    for (; a >= 0; --a) {
      auto& i = idx[static_cast<std::size_t>(a)];
      if (++i < choices[static_cast<std::size_t>(a)].size()) break;
      i = 0;
    }
    if (a < 0) return std::nullopt;
  }
}

inline bool cell_contained_at_depth(const Cell& cell, int s, int k, int n) {
  return find_containing_cube(cell, s, k, n).has_value();
}

// `cell` at scale 3^k lies in M^m_n(k).
inline bool cell_in_approximant(const Cell& cell, const MengerParams& params) {
  params.check();
  if (cell.ambient_dim() != params.m) throw ParameterError("cell dimension does not match m");
  return cell_contained_at_depth(cell, params.k, params.k, params.n);
}

struct RefinementCounterexample {
  CubeAddress cube;  // retained cube C
  Cell face;         // n-face F of C, at the scale of C's depth
  Cell subface;      // triadic sub-face f of F, one level finer
};

struct RefinementReport {
  int m = 0;
  int n = 0;
  int max_depth = 0;
  std::uint64_t cubes_checked = 0;
  std::uint64_t faces_checked = 0;
  std::uint64_t subfaces_checked = 0;
  std::vector<RefinementCounterexample> counterexamples;

  [[nodiscard]] bool holds() const { return counterexamples.empty(); }
  [[nodiscard]] std::string id() const { return "refinement-lemma/m=" + std::to_string(m) + ",n=" + std::to_string(n); }
};

// Exhaustively checks, for every retained cube C of depth 0..max_depth, every
// n-face F of C and every triadic sub-face f of F, that some child Q of C
// passes the digit rule and has f as a face. The statement is local to C, so
// depth 0 already covers every depth by self-similarity; deeper levels are a
// cross-check through the full address machinery.
inline RefinementReport refinement_lemma_check(int m, int n, int max_depth = 1) {
  MengerParams{m, n, 0}.check();
  if (m > 5) throw ResourceError("refinement lemma check is limited to m <= 5");
  if (max_depth < 0 || max_depth > 2) throw ParameterError("refinement lemma depth must be in [0, 2]");
  RefinementReport report{m, n, max_depth, 0, 0, 0, {}};
  for (int depth = 0; depth <= max_depth; ++depth) {
    for (const CubeAddress& addr : enumerate_retained({m, n, depth})) {
      ++report.cubes_checked;
      const LatticePoint c = cube_of(addr);
      const LatticePoint c3 = 3 * c;
      for (const Cell& face : faces(Cell::cube(c), n)) {
        ++report.faces_checked;
        const std::vector<int> face_axes = face.axes();
        const Coord subcount = pow3(n);
        for (Coord code = 0; code < subcount; ++code) {
          ++report.subfaces_checked;
          LatticePoint sub_corner = 3 * face.corner();
          Coord v = code;
          for (int axis : face_axes) {
            sub_corner[axis] += v % 3;
            v /= 3;
          }
          const Cell subface(sub_corner, face.axis_mask());
          bool found = false;
          for (const Cell& q : incident_cells(subface, m, m)) {
            DigitVector digits(m);
            bool inside = true;
            for (int a = 0; a < m; ++a) {
              const Coord rel = q.corner()[a] - c3[a];
              if (rel < 0 || rel > 2) {
                inside = false;
                break;
              }
              digits.set(a, static_cast<int>(rel));
            }
            if (inside && touches_n_skeleton(digits, n)) {
              found = true;
              break;
            }
          }
          if (!found) report.counterexamples.push_back({addr, face, subface});
        }
      }
    }
  }
  return report;
}

}  // namespace menger_knots
