#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "menger_knots/invariants.hpp"
#include "menger_knots/knot.hpp"
#include "menger_knots/knot_io.hpp"

namespace test_support {

using namespace menger_knots;

inline std::filesystem::path data_dir() { return MENGER_KNOTS_DATA_DIR; }

inline CubicalKnot bundled(const std::string& name) { return load_knot_file(data_dir() / "knots" / (name + ".knot")); }

inline CubicalKnot knot_of(std::initializer_list<std::array<Coord, 3>> pts, int scale_exp) {
  std::vector<LatticePoint> v;
  for (const auto& p : pts) v.push_back(LatticePoint{p[0], p[1], p[2]});
  return {std::move(v), scale_exp};
}

// Counts Fox colorings by trying all p^arcs assignments.
inline std::uint64_t brute_force_colorings(const KnotDiagram& d, int p) {
  const auto arcs = static_cast<std::size_t>(d.arcs);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < arcs; ++i) total *= static_cast<std::uint64_t>(p);
  std::uint64_t count = 0;
  std::vector<int> c(arcs, 0);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t v = code;
    for (std::size_t i = 0; i < arcs; ++i) {
      c[i] = static_cast<int>(v % static_cast<std::uint64_t>(p));
      v /= static_cast<std::uint64_t>(p);
    }
    bool ok = true;
    for (const auto& x : d.crossings) {
      if (((2 * c[x.over] - c[x.under_in] - c[x.under_out]) % p + p) % p != 0) {
        ok = false;
        break;
      }
    }
    if (ok) ++count;
  }
  return count;
}

// A random legal move for `knot`, or nothing after `tries` attempts.
inline std::optional<MoveRecord> random_legal_move(const CubicalKnot& knot, std::mt19937_64& rng, int tries = 200) {
  const auto& dirs = all_directions();
  for (int t = 0; t < tries; ++t) {
    const std::size_t i = rng() % knot.size();
    const LatticePoint u = knot.vertex(i);
    const Direction a = *Direction::between(u, knot.vertex(i + 1));
    Direction w = dirs[rng() % dirs.size()];
    if (w.axis == a.axis) continue;
    MoveRecord mv;
    switch (rng() % 3) {
      case 0: mv = {MoveKind::spike, u, a, w}; break;
      case 1: {
        const Direction b = *Direction::between(knot.vertex(i + 1), knot.vertex(i + 2));
        if (b.axis == a.axis) continue;
        mv = {MoveKind::slide, u, a, b};
        break;
      }
      default: {
        // u -> u+w -> u+w+a -> u+a
        const Direction first = a;
        const Direction second = *Direction::between(knot.vertex(i + 1), knot.vertex(i + 2));
        const Direction third = *Direction::between(knot.vertex(i + 2), knot.vertex(i + 3));
        if (third != first.reversed() || second.axis == first.axis) continue;
        mv = {MoveKind::unspike, u, second, first};
        break;
      }
    }
    if (check_move(knot, mv)) return mv;
  }
  return std::nullopt;
}

}  // namespace test_support
