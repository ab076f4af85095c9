#pragma once

// Knot text format:
//   cubical-knot v1 m=3 scale=<s>
//   x y z          (one vertex per line, cyclic order, closing edge implied)
// '#' starts a comment that runs to end of line; blank lines are ignored.

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "io.hpp"
#include "knot.hpp"

namespace menger_knots {

inline constexpr const char* kKnotHeaderPrefix = "cubical-knot v1 m=3 scale=";

inline std::string serialize_knot(const CubicalKnot& knot) {
  std::ostringstream out;
  out << kKnotHeaderPrefix << knot.scale_exp() << '\n';
  for (const auto& p : knot.vertices()) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  return out.str();
}

// Parses the text format. Checks syntax only; topology is validate()'s job.
inline CubicalKnot parse_knot(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  int scale_exp = 0;
  std::vector<LatticePoint> vertices;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!have_header) {
      const std::string prefix = kKnotHeaderPrefix;
      if (line.rfind(prefix, 0) != 0) throw FormatError(where + "expected header '" + prefix + "<s>'");
      const std::string rest = line.substr(prefix.size());
      std::size_t used = 0;
      try {
        scale_exp = std::stoi(rest, &used);
      } catch (const std::exception&) {
        throw FormatError(where + "bad scale '" + rest + "'");
      }
      if (rest.find_first_not_of(" \t", used) != std::string::npos || scale_exp < 0) {
        throw FormatError(where + "bad scale '" + rest + "'");
      }
      have_header = true;
      continue;
    }
    std::istringstream fields(line);
    Coord x = 0;
    Coord y = 0;
    Coord z = 0;
    std::string extra;
    if (!(fields >> x >> y >> z) || (fields >> extra)) {
      throw FormatError(where + "expected three integers, got '" + line + "'");
    }
    vertices.push_back(LatticePoint{x, y, z});
  }
  if (!have_header) throw FormatError("missing 'cubical-knot v1' header");
  return {std::move(vertices), scale_exp};
}

inline CubicalKnot load_knot_file(const std::filesystem::path& path) { return parse_knot(read_file(path)); }

inline void save_knot_file(const CubicalKnot& knot, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_knot(knot));
}

}  // namespace menger_knots
