#include <gtest/gtest.h>

#include "menger_knots/invariants.hpp"
#include "test_support.hpp"

namespace {

using namespace menger_knots;
using test_support::brute_force_colorings;

// Standard diagrams: crossing i ends arc i and starts arc i+1.
KnotDiagram cyclic_diagram(const std::vector<int>& over) {
  KnotDiagram d;
  d.arcs = static_cast<int>(over.size());
  for (int i = 0; i < d.arcs; ++i) d.crossings.push_back({over[static_cast<std::size_t>(i)], i, (i + 1) % d.arcs, 1});
  return d;
}

KnotDiagram trefoil_diagram() { return cyclic_diagram({2, 0, 1}); }
KnotDiagram figure_eight_diagram() { return cyclic_diagram({3, 0, 1, 2}); }

TEST(Fox, HandBuiltDiagramsMatchBruteForce) {
  for (int p : {3, 5, 7, 11}) {
    EXPECT_EQ(fox_colorings(trefoil_diagram(), p), brute_force_colorings(trefoil_diagram(), p)) << p;
    EXPECT_EQ(fox_colorings(figure_eight_diagram(), p), brute_force_colorings(figure_eight_diagram(), p)) << p;
  }
  EXPECT_EQ(fox_colorings(trefoil_diagram(), 3), 9U);
  EXPECT_EQ(fox_colorings(trefoil_diagram(), 5), 5U);
  EXPECT_EQ(fox_colorings(figure_eight_diagram(), 5), 25U);
  EXPECT_EQ(fox_colorings(figure_eight_diagram(), 3), 3U);
}

TEST(Fox, UnknotDiagramHasOnlyTrivialColorings) {
  KnotDiagram d;
  EXPECT_EQ(fox_colorings(d, 7), 7U);
}

TEST(Fox, RejectsNonPrimes) {
  EXPECT_THROW(fox_colorings(trefoil_diagram(), 9), ParameterError);
  EXPECT_THROW(fox_colorings(trefoil_diagram(), 2), ParameterError);
  EXPECT_TRUE(is_odd_prime(13));
  EXPECT_FALSE(is_odd_prime(1));
}

TEST(Projection, BundledKnotsMatchBruteForce) {
  for (const char* name : {"unit_square", "trefoil", "figure_eight"}) {
    const auto k = test_support::bundled(name);
    const auto r = invariant_report(k, {3, 5, 7}, 0);
    const KnotDiagram d = project(k, r.direction);
    ASSERT_LE(d.arcs, 12) << name;
    for (int p : {3, 5, 7}) EXPECT_EQ(r.colorings.at(p), brute_force_colorings(d, p)) << name << " p=" << p;
  }
}

TEST(Projection, KnownCounts) {
  const auto tre = invariant_report(test_support::bundled("trefoil"), {3, 5, 7}, 0).colorings;
  EXPECT_EQ(tre, (std::map<int, std::uint64_t>{{3, 9}, {5, 5}, {7, 7}}));
  const auto fig = invariant_report(test_support::bundled("figure_eight"), {3, 5, 7}, 0).colorings;
  EXPECT_EQ(fig, (std::map<int, std::uint64_t>{{3, 3}, {5, 25}, {7, 7}}));
  const auto sq = invariant_report(test_support::bundled("unit_square"), {3, 5, 7}, 0).colorings;
  EXPECT_EQ(sq, (std::map<int, std::uint64_t>{{3, 3}, {5, 5}, {7, 7}}));
}

// Different seeds give different projections, i.e. diagrams related by
// Reidemeister moves; the counts must not change.
TEST(Projection, CountsIndependentOfDirection) {
  for (const char* name : {"trefoil", "figure_eight"}) {
    const auto k = test_support::bundled(name);
    const auto base = invariant_report(k, {3, 5, 7}, 0).colorings;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) EXPECT_EQ(invariant_report(k, {3, 5, 7}, seed).colorings, base);
  }
}

TEST(Projection, ArcsAndCrossingsAgree) {
  const auto k = test_support::bundled("trefoil");
  const auto r = invariant_report(k, {3}, 3);
  const KnotDiagram d = project(k, r.direction);
  EXPECT_EQ(static_cast<std::size_t>(d.arcs), std::max<std::size_t>(1, d.crossings.size()));
  EXPECT_EQ(d.gauss.size(), 2 * d.crossings.size());
  int overs = 0;
  for (const auto& e : d.gauss) overs += e.over ? 1 : 0;
  EXPECT_EQ(static_cast<std::size_t>(overs), d.crossings.size());
  EXPECT_FALSE(gauss_code(d).empty());
}

TEST(Projection, TranslationAndScaleInvariant) {
  const auto k = test_support::bundled("figure_eight");
  const auto base = invariant_report(k, {3, 5, 7}, 0).colorings;
  EXPECT_EQ(invariant_report(translate(k, LatticePoint{4, -2, 9}), {3, 5, 7}, 0).colorings, base);
  EXPECT_EQ(invariant_report(scale(k, 3), {3, 5, 7}, 0).colorings, base);
}

TEST(Projection, AxisDirectionIsNotGeneric) {
  const auto k = test_support::bundled("trefoil");
  EXPECT_THROW(project(k, LatticePoint{0, 0, 1}), GenericityError);
  EXPECT_THROW(project(k, LatticePoint{0, 0, 0}), ParameterError);
}

TEST(Projection, SquareHasNoCrossings) {
  const auto d = project(test_support::bundled("unit_square"), LatticePoint{1, 2, 3});
  EXPECT_TRUE(d.crossings.empty());
  EXPECT_EQ(d.writhe(), 0);
}

}  // namespace
