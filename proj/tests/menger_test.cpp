#include <gtest/gtest.h>

#include <random>

#include "menger_knots/menger.hpp"

namespace {

using namespace menger_knots;

// Geometric oracle: the closed subcube with digit vector d (side 1/3) meets
// the n-skeleton of [0,1]^m iff it meets some face that fixes m-n coordinates
// to 0 or 1. Coordinates are scaled by 3, so the subcube is [d_i, d_i + 1].
bool meets_skeleton_geometrically(const DigitVector& d, int n) {
  const int m = d.dim();
  for (unsigned fixed = 0; fixed < (1U << m); ++fixed) {
    if (std::popcount(fixed) != m - n) continue;
    for (unsigned values = 0; values < (1U << m); ++values) {
      bool meets = true;
      for (int i = 0; i < m && meets; ++i) {
        if (!((fixed >> i) & 1U)) continue;
        const int target = ((values >> i) & 1U) ? 3 : 0;
        meets = d[i] <= target && target <= d[i] + 1;
      }
      if (meets) return true;
    }
  }
  return false;
}

TEST(Menger, DigitRuleMatchesGeometry) {
  for (auto [m, n] : {std::pair{3, 1}, {3, 2}, {4, 1}, {4, 2}, {3, 0}, {5, 3}}) {
    for (const auto& dv : all_digit_vectors(m)) {
      EXPECT_EQ(touches_n_skeleton(dv, n), meets_skeleton_geometrically(dv, n)) << dv.to_string() << " n=" << n;
    }
  }
}

TEST(Menger, SpongeStageOneKeepsTwenty) {
  EXPECT_EQ(retained_count({3, 1, 1}), 20);
  EXPECT_EQ(retained_count({3, 1, 0}), 1);
  EXPECT_EQ(retained_count({3, 1, 3}), 8000);
  EXPECT_EQ(retained_count({4, 2, 1}), 72);
  EXPECT_EQ(retained_count({2, 0, 1}), 4);  // Cantor dust
  EXPECT_EQ(retained_count({2, 1, 1}), 8);  // Sierpinski carpet
}

TEST(Menger, CountsAreExact) {
  EXPECT_EQ(retained_count({3, 1, 40}), BigInt(boost::multiprecision::pow(BigInt(20), 40)));
  const auto r = retention_report({3, 1, 2});
  EXPECT_EQ(r.retained_count + r.removed_count, 729);
}

TEST(Menger, PerStepCountMatchesBruteForce) {
  for (int m = 2; m <= 5; ++m) {
    for (int n = 0; n < m; ++n) {
      std::uint64_t count = 0;
      for (const auto& dv : all_digit_vectors(m)) count += meets_skeleton_geometrically(dv, n) ? 1 : 0;
      EXPECT_EQ(retained_per_step(m, n), count) << "m=" << m << " n=" << n;
    }
  }
}

TEST(Menger, ExhaustiveEnumerationAgrees) {
  for (int k = 0; k <= 4; ++k) {
    EXPECT_EQ(BigInt(count_retained_exhaustive({3, 1, k}, 1'000'000)), retained_count({3, 1, k})) << "k=" << k;
  }
  EXPECT_EQ(count_retained_exhaustive({4, 2, 1}, 100), 72U);
}

TEST(Menger, EnumerationCapRefuses) {
  EXPECT_THROW(count_retained_exhaustive({3, 1, 5}, 1'000'000), ResourceError);
}

TEST(Menger, LazyRangeIsOrderedAndComplete) {
  std::vector<CubeAddress> seen;
  for (const auto& a : enumerate_retained({3, 1, 2})) {
    EXPECT_TRUE(is_retained(a, 1));
    seen.push_back(a);
  }
  EXPECT_EQ(seen.size(), 400U);
  EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
  EXPECT_TRUE(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
  std::size_t depth0 = 0;
  for (const auto& a : enumerate_retained({3, 1, 0})) {
    EXPECT_EQ(a.depth(), 0);
    ++depth0;
  }
  EXPECT_EQ(depth0, 1U);
}

TEST(Menger, InvalidParams) {
  EXPECT_THROW(retained_count({3, 3, 1}), ParameterError);
  EXPECT_THROW(retained_count({3, -1, 1}), ParameterError);
  EXPECT_THROW(retained_count({1, 0, 1}), ParameterError);
  EXPECT_THROW(retained_count({3, 1, -1}), ParameterError);
}

// Containment oracle: every depth-k cube of the grid, tested directly.
bool contained_brute_force(const Cell& cell, int s, int k, int n) {
  const Coord side = pow3(s - k);
  const Coord per = pow3(k);
  const LatticePoint far = cell.far_corner();
  for (Coord x = 0; x < per; ++x) {
    for (Coord y = 0; y < per; ++y) {
      for (Coord z = 0; z < per; ++z) {
        const LatticePoint c{x, y, z};
        bool inside = true;
        for (int a = 0; a < 3; ++a) inside = inside && cell.corner()[a] >= c[a] * side && far[a] <= (c[a] + 1) * side;
        if (inside && corner_retained(c, k, n)) return true;
      }
    }
  }
  return false;
}

TEST(Menger, ContainmentMatchesBruteForce) {
  std::mt19937_64 rng(7);
  const int s = 3;
  for (int trial = 0; trial < 400; ++trial) {
    const int axis = static_cast<int>(rng() % 3);
    LatticePoint lo(3);
    for (int a = 0; a < 3; ++a) lo[a] = static_cast<Coord>(rng() % (a == axis ? 27 : 28));
    const Cell edge(lo, static_cast<std::uint8_t>(1U << axis));
    for (int k = 0; k <= s; ++k) {
      const auto found = find_containing_cube(edge, s, k, 1);
      EXPECT_EQ(found.has_value(), contained_brute_force(edge, s, k, 1)) << edge.to_string() << " k=" << k;
      if (found) {
        EXPECT_TRUE(is_retained(*found, 1));
        const LatticePoint c = cube_of(*found);
        const Coord side = pow3(s - k);
        for (int a = 0; a < 3; ++a) {
          EXPECT_GE(edge.corner()[a], c[a] * side);
          EXPECT_LE(edge.far_corner()[a], (c[a] + 1) * side);
        }
      }
    }
  }
}

TEST(Menger, GoodAtDepthImpliesGoodAtShallowerDepths) {
  const int s = 3;
  for (Coord x = 0; x < 27; ++x) {
    for (Coord y = 0; y <= 27; ++y) {
      for (Coord z = 0; z <= 27; z += 3) {
        const Cell e(LatticePoint{x, y, z}, 1);
        for (int k = 1; k <= s; ++k) {
          if (cell_contained_at_depth(e, s, k, 1)) {
            EXPECT_TRUE(cell_contained_at_depth(e, s, k - 1, 1));
          }
        }
      }
    }
  }
}

TEST(Menger, BoundaryEdgesAreAlwaysRetained) {
  // The 1-skeleton of the unit cube lies in every approximant.
  for (int k = 0; k <= 4; ++k) {
    const Coord side = pow3(k);
    for (Coord x = 0; x < side; ++x) {
      EXPECT_TRUE(cell_in_approximant(Cell(LatticePoint{x, 0, 0}, 1), {3, 1, k}));
      EXPECT_TRUE(cell_in_approximant(Cell(LatticePoint{x, side, side}, 1), {3, 1, k}));
    }
  }
}

TEST(Menger, ContainmentRejectsOutsideCells) {
  EXPECT_THROW(find_containing_cube(Cell(LatticePoint{27, 0, 0}, 1), 3, 1, 1), OutOfBoundsError);
  EXPECT_THROW(find_containing_cube(Cell(LatticePoint{0, 0, 0}, 1), 1, 2, 1), ParameterError);
}

TEST(Menger, RefinementLemmaHolds) {
  for (auto [m, n] : {std::pair{3, 1}, {3, 2}, {4, 1}, {4, 2}}) {
    const auto r = refinement_lemma_check(m, n, 1);
    EXPECT_TRUE(r.holds()) << "m=" << m << " n=" << n;
    EXPECT_EQ(r.cubes_checked, 1 + retained_per_step(m, n));
    EXPECT_GT(r.subfaces_checked, 0U);
  }
  EXPECT_EQ(refinement_lemma_check(3, 1).id(), "refinement-lemma/m=3,n=1");
}

TEST(Menger, RefinementLemmaLimits) {
  EXPECT_THROW(refinement_lemma_check(6, 1), ResourceError);
  EXPECT_THROW(refinement_lemma_check(3, 1, 3), ParameterError);
}

}  // namespace
