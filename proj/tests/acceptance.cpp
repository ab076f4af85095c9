// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "menger_knots/cli.hpp"
#include "menger_knots/menger_knots.hpp"
#include "test_support.hpp"

namespace {

using namespace menger_knots;
namespace fs = std::filesystem;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.ok && secs > limit_seconds) {
    o.ok = false;
    o.detail = "took longer than " + std::to_string(limit_seconds) + " s";
  }
  if (!o.ok) ++failures;
  std::ostringstream line;
  line << "criterion " << id << " " << (o.ok ? "PASS" : "FAIL") << "  " << title << " (" << std::fixed
       << std::setprecision(2) << secs << " s)";
  if (!o.detail.empty()) line << "  " << o.detail;
  std::cout << line.str() << std::endl;
}

std::set<LatticePoint> vertex_set(const Cell& c) {
  std::set<LatticePoint> out;
  const int m = c.ambient_dim();
  for (unsigned sub = 0; sub < (1U << m); ++sub) {
    if ((sub & ~static_cast<unsigned>(c.axis_mask())) != 0U) continue;
    LatticePoint p = c.corner();
    for (int a = 0; a < m; ++a) p[a] += (sub >> a) & 1U;
    out.insert(p);
  }
  return out;
}

// Counts d-cells of C^m containing `cell`, by scanning every d-cell whose
// corner is within one unit and comparing vertex sets.
std::size_t enumerate_incident(const Cell& cell, int d) {
  const int m = cell.ambient_dim();
  const auto inner = vertex_set(cell);
  std::size_t count = 0;
  int total = 1;
  for (int i = 0; i < m; ++i) total *= 3;
  for (int code = 0; code < total; ++code) {
    LatticePoint corner = cell.corner();
    int v = code;
    for (int a = 0; a < m; ++a) {
      corner[a] += v % 3 - 1;
      v /= 3;
    }
    for (unsigned mask = 0; mask < (1U << m); ++mask) {
      if (std::popcount(mask) != d) continue;
      const auto outer = vertex_set(Cell(corner, static_cast<std::uint8_t>(mask)));
      if (std::includes(outer.begin(), outer.end(), inner.begin(), inner.end())) ++count;
    }
  }
  return count;
}

// Closed subcube with digits d (coordinates scaled by 3) meets a face of
// [0,3]^m fixing m-n coordinates to 0 or 3.
bool meets_skeleton(const DigitVector& d, int n) {
  const int m = d.dim();
  for (unsigned fixed = 0; fixed < (1U << m); ++fixed) {
    if (std::popcount(fixed) != m - n) continue;
    for (unsigned values = 0; values < (1U << m); ++values) {
      bool meets = true;
      for (int i = 0; i < m && meets; ++i) {
        if ((fixed >> i) & 1U) {
          const int t = ((values >> i) & 1U) ? 3 : 0;
          meets = d[i] <= t && t <= d[i] + 1;
        }
      }
      if (meets) return true;
    }
  }
  return false;
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "menger-knots");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o;
  std::ostringstream e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str() + e.str();
  return code;
}

std::string knot_path(const std::string& name) { return (test_support::data_dir() / "knots" / (name + ".knot")).string(); }

// Runs the CLI pipeline and the checks of criterion 5 on one bundled knot.
// Returns the certificate text.
std::string run_bundled(const std::string& name, const fs::path& dir, std::uint64_t seed, Outcome& o) {
  fs::create_directories(dir);
  const std::string cert_path = (dir / (name + ".json")).string();
  std::string out;
  const int code = cli({"pipeline", "run", "--in", knot_path(name), "--depth", "3", "--seed", std::to_string(seed), "--out",
                        cert_path},
                       &out);
  o.require(code == 0, name + ": pipeline run exited " + std::to_string(code) + ": " + out);
  if (code != 0) return {};
  o.require(cli({"cert", "verify", "--in", cert_path, "--original", knot_path(name)}, &out) == 0,
            name + ": verification failed: " + out);
  const std::string text = read_file(cert_path);
  const MengerCertificate cert = certificate_from_json(nlohmann::json::parse(text));
  for (int k = 1; k <= 3; ++k) o.require(knot_in_approximant(cert.knot, {3, 1, k}), name + ": not in M(" + std::to_string(k) + ")");
  o.require(knot_in_approximant(scale(cert.knot, 3), {3, 1, 4}), name + ": subdivided knot not in M(4)");
  o.require(cert.invariants_before == cert.invariants_after, name + ": coloring maps differ");

  // Independent recount with the brute-force oracle on fresh projections.
  const CubicalKnot original = test_support::bundled(name);
  for (const auto* k : {&original, &cert.knot}) {
    const auto r = invariant_report(*k, audit_primes(), seed);
    const KnotDiagram d = project(*k, r.direction);
    for (int p : audit_primes()) {
      o.require(test_support::brute_force_colorings(d, p) == cert.invariants_before.at(p),
                name + ": brute-force count differs at p=" + std::to_string(p));
    }
  }
  return text;
}

std::string fuzz_report(std::uint64_t seed, Outcome& o) {
  std::mt19937_64 rng(seed);
  std::ostringstream report;
  const std::vector<CubicalKnot> starts{scale(scale(test_support::bundled("unit_square"), 3), 3),
                                        test_support::bundled("trefoil"), test_support::bundled("figure_eight")};
  constexpr int kMoves = 10000;
  int applied = 0;
  int round = 0;
  while (applied < kMoves && o.ok) {
    CubicalKnot k = starts[static_cast<std::size_t>(round) % starts.size()];
    const auto expected = invariant_report(k, audit_primes(), seed).colorings;
    for (int step = 0; step < 500 && applied < kMoves; ++step) {
      const auto mv = test_support::random_legal_move(k, rng);
      if (!mv) continue;
      const CubicalKnot next = apply_move(k, *mv);
      o.require(static_cast<bool>(validate(next)), "invalid knot after " + mv->to_string());
      o.require(apply_move(next, mv->inverse()) == k, "inverse of " + mv->to_string() + " does not restore the knot");
      k = next;
      ++applied;
      report << mv->to_string() << '\n';
      if (applied % 250 == 0) {
        const auto now = invariant_report(k, audit_primes(), seed + static_cast<std::uint64_t>(applied)).colorings;
        o.require(now == expected, "coloring counts changed after " + std::to_string(applied) + " moves");
        report << "colorings " << colorings_string(now) << '\n';
      }
    }
    ++round;
  }
  o.require(applied == kMoves, "only " + std::to_string(applied) + " moves applied");
  return report.str();
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "menger_knots_acceptance";
  fs::create_directories(dir);

  criterion(1, "counting reproduction", 10, [] {
    Outcome o;
    o.require(retained_count({3, 1, 1}) == 20, "retained_count(3,1,1) != 20");
    for (int k = 0; k <= 4; ++k) {
      const auto exhaustive = count_retained_exhaustive({3, 1, k}, 1'000'000);
      o.require(BigInt(exhaustive) == retained_count({3, 1, k}) &&
                    retained_count({3, 1, k}) == boost::multiprecision::pow(BigInt(20), static_cast<unsigned>(k)),
                "k=" + std::to_string(k) + ": enumeration disagrees with 20^k");
    }
    std::size_t oracle = 0;
    for (const auto& dv : all_digit_vectors(4)) oracle += meets_skeleton(dv, 2) ? 1 : 0;
    o.require(all_digit_vectors(4).size() == 81 && oracle == 72 && retained_count({4, 2, 1}) == 72,
              "retained_count(4,2,1) != 72 or oracle disagrees");
    o.detail = "20, 20^k for k<=4, and 72 reproduced";
    return o;
  });

  criterion(2, "incidence reproduction", 1, [] {
    Outcome o;
    const auto counts = [](int m, std::uint8_t mask) {
      const Cell c(LatticePoint(m), mask);
      std::vector<std::size_t> v;
      for (int d = c.dim() + 1; d <= m; ++d) {
        const std::size_t n = incident_cells(c, d, m).size();
        v.push_back(n == enumerate_incident(c, d) ? n : 0);
      }
      return v;
    };
    o.require(counts(3, 0) == std::vector<std::size_t>{6, 12, 8}, "C^3 vertex incidences");
    o.require(counts(3, 1) == std::vector<std::size_t>{4, 4}, "C^3 edge incidences");
    o.require(counts(4, 0) == std::vector<std::size_t>{8, 24, 32, 16}, "C^4 vertex incidences");
    o.require(counts(4, 1) == std::vector<std::size_t>{6, 12, 8}, "C^4 edge incidences");
    o.detail =
        "C^3 vertex (6,12,8), edge (4,4); C^4 vertex (8,24,32,16), edge (6,12,8). "
        "Note: 32 cubes and 16 hypercubes are per-vertex counts in C^4; "
        "enumeration gives 12 cubes and 8 hypercubes per edge";
    return o;
  });

  criterion(3, "digit rule equals geometric intersection", 1, [] {
    Outcome o;
    for (auto [m, n] : {std::pair{3, 1}, {3, 2}, {4, 1}, {4, 2}}) {
      for (const auto& dv : all_digit_vectors(m)) {
        o.require(touches_n_skeleton(dv, n) == meets_skeleton(dv, n),
                  "m=" + std::to_string(m) + " n=" + std::to_string(n) + " digits " + dv.to_string());
      }
    }
    return o;
  });

  criterion(4, "refinement lemma", 60, [] {
    Outcome o;
    std::ostringstream detail;
    for (auto [m, n] : {std::pair{3, 1}, {4, 1}, {4, 2}, {5, 3}}) {
      const auto r = refinement_lemma_check(m, n);
      o.require(r.holds(), r.id() + ": " + std::to_string(r.counterexamples.size()) + " counterexamples");
      detail << r.id() << " subfaces=" << r.subfaces_checked << " ";
    }
    if (o.ok) o.detail = detail.str();
    return o;
  });

  std::map<std::string, std::string> certs;
  for (const std::string name : {"unit_square", "trefoil", "figure_eight"}) {
    criterion(5, "pipeline to depth 3: " + name, 300, [&] {
      Outcome o;
      certs[name] = run_bundled(name, dir, 0, o);
      if (o.ok) {
        const auto cert = certificate_from_json(nlohmann::json::parse(certs[name]));
        o.detail = "invariants " + colorings_string(cert.invariants_after) + ", " + std::to_string(cert.log.size()) +
                   " log entries";
        if (name == "trefoil") o.require(cert.invariants_after.at(3) == 9, "trefoil 3-colorings != 9");
        if (name == "figure_eight") o.require(cert.invariants_after.at(5) == 25, "figure-eight 5-colorings != 25");
      }
      return o;
    });
  }

  std::string fuzz;
  criterion(6, "move calculus fuzz (10^4 moves)", 120, [&] {
    Outcome o;
    fuzz = fuzz_report(42, o);
    return o;
  });

  criterion(7, "determinism", 600, [&] {
    Outcome o;
    for (const auto& [name, text] : certs) {
      Outcome again;
      o.require(run_bundled(name, dir / "again", 0, again) == text, name + ": certificate bytes differ on rerun");
      o.require(again.ok, name + ": rerun failed: " + again.detail);
    }
    Outcome again;
    o.require(fuzz_report(42, again) == fuzz, "fuzz report differs on rerun");
    return o;
  });

  fs::remove_all(dir);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
