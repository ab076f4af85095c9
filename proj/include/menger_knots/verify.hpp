#pragma once

// Independent certificate checker. It shares only the data types and the
// invariant computation with the producer: replay, move legality, knot
// validity and the retention test are re-implemented here on plain arrays.

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "certificate.hpp"
#include "invariants.hpp"
#include "knot.hpp"

namespace menger_knots {

struct VerificationResult {
  bool ok = true;
  std::string check;    // name of the first failing check
  std::string message;  // location and reason

  explicit operator bool() const { return ok; }

  static VerificationResult pass() { return {}; }
  static VerificationResult fail(std::string check, std::string message) {
    return {false, std::move(check), std::move(message)};
  }
};

namespace verifier {

using V = std::array<std::int64_t, 3>;

struct Polygon {
  std::vector<V> v;
  int scale = 0;
};

inline Polygon from_knot(const CubicalKnot& k) {
  Polygon p;
  p.scale = k.scale_exp();
  for (const auto& q : k.vertices()) {
    if (q.dim() != 3) return {{}, -1};
    p.v.push_back({q[0], q[1], q[2]});
  }
  return p;
}

inline std::string str(const V& a) {
  return "(" + std::to_string(a[0]) + "," + std::to_string(a[1]) + "," + std::to_string(a[2]) + ")";
}

inline std::int64_t l1(const V& a, const V& b) {
  return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]);
}

// Empty string when the polygon is a lattice knot.
inline std::string defect(const Polygon& p) {
  if (p.scale < 0) return "vertex outside Z^3";
  if (p.v.size() < 4) return "fewer than 4 vertices";
  std::set<V> seen;
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    if (!seen.insert(p.v[i]).second) return "vertex " + str(p.v[i]) + " repeated";
    if (l1(p.v[i], p.v[(i + 1) % p.v.size()]) != 1) return "edge " + std::to_string(i) + " is not a unit step";
  }
  return {};
}

// Same closed polygon up to starting vertex and orientation.
inline bool same_polygon(const Polygon& a, const Polygon& b) {
  if (a.scale != b.scale || a.v.size() != b.v.size()) return false;
  const std::size_t n = a.v.size();
  if (n == 0) return true;
  const auto it = std::find(b.v.begin(), b.v.end(), a.v[0]);
  if (it == b.v.end()) return false;
  const auto off = static_cast<std::size_t>(it - b.v.begin());
  for (int dir : {1, -1}) {
    bool eq = true;
    for (std::size_t i = 0; i < n && eq; ++i) {
      const std::size_t j = dir > 0 ? (off + i) % n : (off + n - i) % n;
      eq = a.v[i] == b.v[j];
    }
    if (eq) return true;
  }
  return false;
}

inline V unit(const Direction& d) {
  V u{0, 0, 0};
  u[static_cast<std::size_t>(d.axis)] = d.sign;
  return u;
}

inline V add(V a, const V& b) {
  for (std::size_t i = 0; i < 3; ++i) a[i] += b[i];
  return a;
}

inline std::int64_t pow3i(int k) {
  std::int64_t r = 1;
  while (k-- > 0) r *= 3;
  return r;
}

// Depth-k cube with integer index c survives iff no level has two middle digits.
inline bool cube_survives(V c, int k) {
  for (int l = 0; l < k; ++l) {
    int middles = 0;
    for (auto& x : c) {
      if (x % 3 == 1) ++middles;
      x /= 3;
    }
    if (middles > 1) return false;
  }
  return true;
}

// Cube index from an address string like "012/100".
inline std::optional<V> cube_index(const std::string& addr, int depth) {
  V c{0, 0, 0};
  int levels = 0;
  std::size_t pos = 0;
  while (pos <= addr.size() && !addr.empty()) {
    const std::size_t slash = std::min(addr.find('/', pos), addr.size());
    const std::string level = addr.substr(pos, slash - pos);
    if (level.size() != 3) return std::nullopt;
    for (std::size_t i = 0; i < 3; ++i) {
      if (level[i] < '0' || level[i] > '2') return std::nullopt;
      c[i] = 3 * c[i] + (level[i] - '0');
    }
    ++levels;
    pos = slash + 1;
  }
  if (levels != depth) return std::nullopt;
  return c;
}

// Applies one move with full legality checks; returns an error or "".
inline std::string replay_move(Polygon& p, const MoveRecord& mv) {
  if (mv.anchor.dim() != 3) return "anchor not in Z^3";
  if (mv.edge.axis == mv.push.axis || mv.edge.axis < 0 || mv.edge.axis > 2 || mv.push.axis < 0 || mv.push.axis > 2) {
    return "edge and push directions must be distinct axes";
  }
  const V u{mv.anchor[0], mv.anchor[1], mv.anchor[2]};
  const V a = unit(mv.edge);
  const V w = unit(mv.push);
  const V ua = add(u, a);
  const V uw = add(u, w);
  const V uaw = add(ua, w);
  auto& v = p.v;
  const std::size_t n = v.size();
  const auto on_knot = [&](const V& x) { return std::find(v.begin(), v.end(), x) != v.end(); };
  const auto at = [&](std::size_t i, std::ptrdiff_t d) {
    return v[static_cast<std::size_t>((static_cast<std::ptrdiff_t>(i) + d + static_cast<std::ptrdiff_t>(n) * 4) %
                                      static_cast<std::ptrdiff_t>(n))];
  };
  const auto it = std::find(v.begin(), v.end(), u);
  if (it == v.end()) return "anchor " + str(u) + " is not a knot vertex";
  const auto i = static_cast<std::size_t>(it - v.begin());
  switch (mv.kind) {
    case MoveKind::spike:
      if (on_knot(uw) || on_knot(uaw)) return "spike square meets the knot";
      for (int d : {1, -1}) {
        if (at(i, d) == ua) {
          const std::size_t pos = d > 0 ? i + 1 : i;
          const std::vector<V> ins = d > 0 ? std::vector<V>{uw, uaw} : std::vector<V>{uaw, uw};
          v.insert(v.begin() + static_cast<std::ptrdiff_t>(pos), ins.begin(), ins.end());
          return {};
        }
      }
      return "no knot edge " + str(u) + "-" + str(ua);
    case MoveKind::unspike:
      if (n <= 4) return "unspike would leave fewer than 4 vertices";
      for (int d : {1, -1}) {
        if (at(i, d) == uw && at(i, 2 * d) == uaw && at(i, 3 * d) == ua) {
          std::vector<V> out;
          const std::size_t j1 = (i + n + static_cast<std::size_t>(n + d)) % n;
          const std::size_t j2 = (i + n + static_cast<std::size_t>(n + 2 * d)) % n;
          for (std::size_t k = 0; k < n; ++k) {
            if (k != j1 && k != j2) out.push_back(v[k]);
          }
          v = std::move(out);
          return {};
        }
      }
      return "no spike " + str(u) + "-" + str(uw) + "-" + str(uaw) + "-" + str(ua);
    case MoveKind::slide:
      if (on_knot(uw)) return "slide target " + str(uw) + " is on the knot";
      for (int d : {1, -1}) {
        if (at(i, d) == ua && at(i, 2 * d) == uaw) {
          v[(i + n + static_cast<std::size_t>(n + d)) % n] = uw;
          return {};
        }
      }
      return "no corner " + str(u) + "-" + str(ua) + "-" + str(uaw);
  }
  return "unknown move";
}

// Swept square of a stage-l move lies in one surviving depth-(l-1) cube.
inline bool confined(const Polygon& p, const MoveRecord& mv, int stage) {
  if (stage < 1 || stage > p.scale) return false;
  const int k = stage - 1;
  const std::int64_t side = pow3i(p.scale - k);
  const std::int64_t cubes = pow3i(k);
  V lo{mv.anchor[0], mv.anchor[1], mv.anchor[2]};
  if (mv.edge.sign < 0) lo[static_cast<std::size_t>(mv.edge.axis)] -= 1;
  if (mv.push.sign < 0) lo[static_cast<std::size_t>(mv.push.axis)] -= 1;
  V hi = lo;
  hi[static_cast<std::size_t>(mv.edge.axis)] += 1;
  hi[static_cast<std::size_t>(mv.push.axis)] += 1;
  // Candidate cube indices per axis: those whose closed interval holds [lo, hi].
  std::array<std::vector<std::int64_t>, 3> cand;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::int64_t c = std::max<std::int64_t>(0, lo[a] / side - 1); c <= std::min(cubes - 1, hi[a] / side); ++c) {
      if (lo[a] >= c * side && hi[a] <= (c + 1) * side) cand[a].push_back(c);
    }
  }
  for (auto x : cand[0]) {
    for (auto y : cand[1]) {
      for (auto z : cand[2]) {
        if (cube_survives({x, y, z}, k)) return true;
      }
    }
  }
  return false;
}

}  // namespace verifier

// Re-checks a certificate against the original knot and reports the first
// failing check.
inline VerificationResult verify_certificate(const MengerCertificate& cert, const CubicalKnot& original) {
  using namespace verifier;
  using R = VerificationResult;

  Polygon cur = from_knot(original);
  if (auto d = defect(cur); !d.empty()) return R::fail("original", "supplied original knot is invalid: " + d);
  if (!same_polygon(cur, from_knot(cert.original))) {
    return R::fail("original", "certificate was issued for a different knot");
  }

  for (std::size_t i = 0; i < cert.log.size(); ++i) {
    const LogEntry& e = cert.log[i];
    const std::string where = "log entry " + std::to_string(i);
    switch (e.op) {
      case LogEntry::Op::translate: {
        if (e.offset.dim() != 3 || e.scale_exp < 0) return R::fail("replay", where + ": bad translation");
        for (auto& x : cur.v) x = add(x, {e.offset[0], e.offset[1], e.offset[2]});
        cur.scale = e.scale_exp;
        break;
      }
      case LogEntry::Op::rescale: {
        if (e.factor != 3) return R::fail("replay", where + ": only factor 3 rescaling is certified");
        std::vector<V> out;
        for (std::size_t j = 0; j < cur.v.size(); ++j) {
          const V a = cur.v[j];
          const V b = cur.v[(j + 1) % cur.v.size()];
          for (int t = 0; t < 3; ++t) {
            V q;
            for (std::size_t c = 0; c < 3; ++c) q[c] = 3 * a[c] + t * (b[c] - a[c]);
            out.push_back(q);
          }
        }
        cur.v = std::move(out);
        cur.scale += 1;
        break;
      }
      case LogEntry::Op::move: {
        if (!confined(cur, e.move, e.stage)) {
          return R::fail("confinement", where + " (" + e.move.to_string() + ") leaves the surviving depth-" +
                                            std::to_string(e.stage - 1) + " cubes");
        }
        if (auto err = replay_move(cur, e.move); !err.empty()) {
          return R::fail("replay", where + " (" + e.move.to_string() + "): " + err);
        }
        break;
      }
    }
    if (auto d = defect(cur); !d.empty()) return R::fail("replay", where + " leaves an invalid knot: " + d);
  }

  const Polygon fin = from_knot(cert.knot);
  if (!same_polygon(cur, fin)) return R::fail("final", "replayed log does not reproduce the certified knot");
  for (const auto& x : fin.v) {
    for (auto c : x) {
      if (c < 0 || c > pow3i(fin.scale)) return R::fail("final", "vertex " + str(x) + " outside the unit cube");
    }
  }

  if (cert.witnesses.size() != fin.v.size()) {
    return R::fail("witness", "expected " + std::to_string(fin.v.size()) + " witnesses, got " +
                                  std::to_string(cert.witnesses.size()));
  }
  for (std::size_t i = 0; i < fin.v.size(); ++i) {
    const V a = fin.v[i];
    const V b = fin.v[(i + 1) % fin.v.size()];
    const auto& w = cert.witnesses[i];
    const std::string edge = "edge " + std::to_string(i) + " " + str(a) + "-" + str(b);
    if (w.from.dim() != 3 || w.to.dim() != 3 || V{w.from[0], w.from[1], w.from[2]} != a ||
        V{w.to[0], w.to[1], w.to[2]} != b) {
      return R::fail("witness", edge + ": witness lists a different edge");
    }
    const auto c = cube_index(w.cube.to_string(), fin.scale);
    if (!c) return R::fail("witness", edge + ": address '" + w.cube.to_string() + "' is not a depth-s address");
    if (!cube_survives(*c, fin.scale)) {
      return R::fail("witness", edge + ": cube " + w.cube.to_string() + " is not retained");
    }
    for (std::size_t ax = 0; ax < 3; ++ax) {
      for (const V& end : {a, b}) {
        if (end[ax] != (*c)[ax] && end[ax] != (*c)[ax] + 1) {
          return R::fail("witness", edge + ": not an edge of cube " + w.cube.to_string());
        }
      }
    }
  }

  const RefinementReport lemma = refinement_lemma_check(3, 1);
  if (cert.lemma_ref != lemma.id() || !lemma.holds()) {
    return R::fail("lemma", "lemma reference '" + cert.lemma_ref + "' does not match a passing refinement check");
  }

  const auto before = invariant_report(original, audit_primes(), cert.config.seed).colorings;
  const auto after = invariant_report(cert.knot, audit_primes(), cert.config.seed).colorings;
  if (before != cert.invariants_before) return R::fail("invariants", "recorded colorings of the original are wrong");
  if (after != cert.invariants_after) return R::fail("invariants", "recorded colorings of the final knot are wrong");
  if (before != after) return R::fail("invariants", "Fox coloring counts differ before and after");

  return R::pass();
}

// Verifies certificate text as stored on disk. The content hash is compared
// after every semantic check.
inline VerificationResult verify_certificate_text(const std::string& text, const CubicalKnot& original) {
  const nlohmann::json j = parse_certificate_json(text);
  const MengerCertificate cert = certificate_from_json(j);
  if (!j.contains("content_hash") || !j.at("content_hash").is_string()) {
    throw FormatError("certificate has no content_hash");
  }
  if (auto r = verify_certificate(cert, original); !r) return r;
  if (j.at("content_hash").get<std::string>() != content_hash(j)) {
    return VerificationResult::fail("hash", "content_hash does not match the certificate body");
  }
  return VerificationResult::pass();
}

}  // namespace menger_knots
