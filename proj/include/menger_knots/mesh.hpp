#pragma once

// Boundary quad mesh of a 3-dimensional Menger approximant, written as OBJ.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "io.hpp"
#include "lattice.hpp"
#include "menger.hpp"

namespace menger_knots {

inline constexpr int kMaxMeshDepth = 5;

struct QuadMesh {
  int k = 0;
  // Integer lattice coordinates at scale 3^k, sorted lexicographically.
  std::vector<std::array<Coord, 3>> vertices;
  // 0-based vertex indices, counter-clockwise seen from outside.
  std::vector<std::array<std::size_t, 4>> quads;
};

// Retention of every depth-k cube of [0,3^k]^3, indexed x-major.
inline std::vector<bool> retained_grid(int k, int n) {
  const Coord side = pow3(k);
  std::vector<int> dx;
  std::vector<int> dy;
  std::vector<int> dz;
  std::vector<bool> grid(static_cast<std::size_t>(side * side * side), false);
  for (Coord x = 0; x < side; ++x) {
    coordinate_digits(x, k, dx);
    for (Coord y = 0; y < side; ++y) {
      coordinate_digits(y, k, dy);
      for (Coord z = 0; z < side; ++z) {
        coordinate_digits(z, k, dz);
        bool keep = true;
        for (std::size_t l = 0; l < static_cast<std::size_t>(k) && keep; ++l) {
          keep = (dx[l] == 1) + (dy[l] == 1) + (dz[l] == 1) <= n;
        }
        grid[static_cast<std::size_t>((x * side + y) * side + z)] = keep;
      }
    }
  }
  return grid;
}

inline QuadMesh build_approximant_mesh(const MengerParams& params) {
  params.check();
  if (params.m != 3) throw ParameterError("mesh export supports m = 3 only");
  if (params.k > kMaxMeshDepth) {
    throw ResourceError("mesh export depth k=" + std::to_string(params.k) + " exceeds cap " + std::to_string(kMaxMeshDepth));
  }
  const Coord side = pow3(params.k);
  const std::vector<bool> grid = retained_grid(params.k, params.n);
  const auto kept = [&](Coord x, Coord y, Coord z) {
    if (x < 0 || y < 0 || z < 0 || x >= side || y >= side || z >= side) return false;
    return static_cast<bool>(grid[static_cast<std::size_t>((x * side + y) * side + z)]);
  };

  using P = std::array<Coord, 3>;
  std::vector<std::array<P, 4>> raw;
  for (Coord x = 0; x < side; ++x) {
    for (Coord y = 0; y < side; ++y) {
      for (Coord z = 0; z < side; ++z) {
        if (!kept(x, y, z)) continue;
        const P c{x, y, z};
        for (int axis = 0; axis < 3; ++axis) {
          const int j = (axis + 1) % 3;
          const int l = (axis + 2) % 3;
          for (int sign : {-1, 1}) {
            P nb = c;
            nb[static_cast<std::size_t>(axis)] += sign;
            if (kept(nb[0], nb[1], nb[2])) continue;
            P base = c;
            if (sign > 0) base[static_cast<std::size_t>(axis)] += 1;
            P pj = base;
            pj[static_cast<std::size_t>(j)] += 1;
            P pl = base;
            pl[static_cast<std::size_t>(l)] += 1;
            P pjl = pj;
            pjl[static_cast<std::size_t>(l)] += 1;
            // e_j x e_l = +e_axis, so (base, pj, pjl, pl) faces +axis.
            if (sign > 0) {
              raw.push_back({base, pj, pjl, pl});
            } else {
              raw.push_back({base, pl, pjl, pj});
            }
          }
        }
      }
    }
  }

  QuadMesh mesh;
  mesh.k = params.k;
  mesh.vertices.reserve(raw.size() * 4);
  for (const auto& q : raw) mesh.vertices.insert(mesh.vertices.end(), q.begin(), q.end());
  std::sort(mesh.vertices.begin(), mesh.vertices.end());
  mesh.vertices.erase(std::unique(mesh.vertices.begin(), mesh.vertices.end()), mesh.vertices.end());
  mesh.quads.reserve(raw.size());
  for (const auto& q : raw) {
    std::array<std::size_t, 4> idx{};
    for (std::size_t i = 0; i < 4; ++i) {
      idx[i] = static_cast<std::size_t>(std::lower_bound(mesh.vertices.begin(), mesh.vertices.end(), q[i]) -
                                        mesh.vertices.begin());
    }
    mesh.quads.push_back(idx);
  }
  return mesh;
}

// OBJ text. Coordinates are exact integers in units of 3^-k.
inline void write_obj(const QuadMesh& mesh, std::ostream& out) {
  out << "# menger approximant boundary, m=3 k=" << mesh.k << "\n";
  out << "# vertex units: 1/3^" << mesh.k << " of the unit cube\n";
  for (const auto& v : mesh.vertices) out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& q : mesh.quads) {
    out << "f " << q[0] + 1 << ' ' << q[1] + 1 << ' ' << q[2] + 1 << ' ' << q[3] + 1 << '\n';
  }
}

inline void export_approximant_mesh(const MengerParams& params, const std::filesystem::path& path) {
  const QuadMesh mesh = build_approximant_mesh(params);
  std::ostringstream out;
  write_obj(mesh, out);
  write_file_atomic(path, out.str());
}

}  // namespace menger_knots
