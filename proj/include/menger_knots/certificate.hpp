#pragma once

// JSON form of a MengerCertificate. Keys are emitted in sorted order and the
// content hash is SHA-256 over the compact dump of every other field, so equal
// certificates are byte-identical files.

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "io.hpp"
#include "knot.hpp"
#include "lattice.hpp"
#include "pipeline.hpp"

namespace menger_knots {

inline constexpr const char* kCertificateFormat = "menger-knot-certificate";

inline std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw ResourceError("SHA-256 computation failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

namespace detail {

using nlohmann::json;

inline json point_json(const LatticePoint& p) {
  json a = json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(p[i]);
  return a;
}

inline json knot_json(const CubicalKnot& k) {
  json v = json::array();
  for (const auto& p : k.vertices()) v.push_back(point_json(p));
  return {{"scale", k.scale_exp()}, {"vertices", v}};
}

inline json colorings_json(const std::map<int, std::uint64_t>& m) {
  json o = json::object();
  for (const auto& [p, c] : m) o[std::to_string(p)] = c;
  return o;
}

inline LatticePoint point_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a point [x, y, z]");
  return LatticePoint{j.at(0).get<Coord>(), j.at(1).get<Coord>(), j.at(2).get<Coord>()};
}

inline CubicalKnot knot_from(const json& j) {
  std::vector<LatticePoint> v;
  for (const auto& p : j.at("vertices")) v.push_back(point_from(p));
  return {std::move(v), j.at("scale").get<int>()};
}

inline std::map<int, std::uint64_t> colorings_from(const json& j) {
  std::map<int, std::uint64_t> m;
  for (const auto& [k, v] : j.items()) m[std::stoi(k)] = v.get<std::uint64_t>();
  return m;
}

}  // namespace detail

inline nlohmann::json certificate_body(const MengerCertificate& c) {
  using nlohmann::json;
  json log = json::array();
  for (const auto& e : c.log) {
    switch (e.op) {
      case LogEntry::Op::translate:
        log.push_back({{"op", "translate"}, {"offset", detail::point_json(e.offset)}, {"scale", e.scale_exp}});
        break;
      case LogEntry::Op::rescale: log.push_back({{"op", "rescale"}, {"factor", e.factor}}); break;
      case LogEntry::Op::move:
        log.push_back({{"op", to_string(e.move.kind)},
                       {"anchor", detail::point_json(e.move.anchor)},
                       {"edge", e.move.edge.to_string()},
                       {"push", e.move.push.to_string()},
                       {"stage", e.stage}});
        break;
    }
  }
  json witnesses = json::array();
  for (const auto& w : c.witnesses) {
    witnesses.push_back({{"edge", {detail::point_json(w.from), detail::point_json(w.to)}}, {"cube", w.cube.to_string()}});
  }
  return {
      {"format", kCertificateFormat},
      {"version", MengerCertificate::kVersion},
      {"config",
       {{"target_depth", c.config.target_depth},
        {"max_autoscale", c.config.max_autoscale},
        {"search_budget", c.config.search_budget},
        {"seed", c.config.seed}}},
      {"menger", {{"m", 3}, {"n", 1}}},
      {"original", detail::knot_json(c.original)},
      {"log", log},
      {"knot", detail::knot_json(c.knot)},
      {"witnesses", witnesses},
      {"lemma_ref", c.lemma_ref},
      {"invariants",
       {{"before", detail::colorings_json(c.invariants_before)}, {"after", detail::colorings_json(c.invariants_after)}}},
  };
}

inline std::string content_hash(const nlohmann::json& body) {
  nlohmann::json copy = body;
  copy.erase("content_hash");
  return "sha256:" + sha256_hex(copy.dump());
}

inline std::string certificate_to_string(const MengerCertificate& c) {
  nlohmann::json body = certificate_body(c);
  body["content_hash"] = content_hash(body);
  return body.dump(2) + "\n";
}

// Structural parse. Semantic checks belong to the verifier.
inline MengerCertificate certificate_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kCertificateFormat) throw FormatError("not a menger-knot certificate");
    if (j.at("version").get<int>() != MengerCertificate::kVersion) throw FormatError("unsupported certificate version");
    MengerCertificate c;
    const auto& cfg = j.at("config");
    c.config.target_depth = cfg.at("target_depth").get<int>();
    c.config.max_autoscale = cfg.at("max_autoscale").get<int>();
    c.config.search_budget = cfg.at("search_budget").get<std::uint64_t>();
    c.config.seed = cfg.at("seed").get<std::uint64_t>();
    if (j.at("menger").at("m").get<int>() != 3 || j.at("menger").at("n").get<int>() != 1) {
      throw FormatError("certificate is not for M^3_1");
    }
    c.original = detail::knot_from(j.at("original"));
    c.knot = detail::knot_from(j.at("knot"));
    for (const auto& e : j.at("log")) {
      const std::string op = e.at("op").get<std::string>();
      if (op == "translate") {
        c.log.push_back(LogEntry::translation(detail::point_from(e.at("offset")), e.at("scale").get<int>()));
      } else if (op == "rescale") {
        c.log.push_back(LogEntry::rescaling(e.at("factor").get<int>()));
      } else {
        const MoveRecord mv{parse_move_kind(op), detail::point_from(e.at("anchor")),
                            Direction::parse(e.at("edge").get<std::string>()),
                            Direction::parse(e.at("push").get<std::string>())};
        c.log.push_back(LogEntry::of_move(mv, e.at("stage").get<int>()));
      }
    }
    for (const auto& w : j.at("witnesses")) {
      const auto& edge = w.at("edge");
      if (!edge.is_array() || edge.size() != 2) throw FormatError("witness edge must have two endpoints");
      c.witnesses.push_back(
          {detail::point_from(edge.at(0)), detail::point_from(edge.at(1)), CubeAddress::parse(3, w.at("cube").get<std::string>())});
    }
    c.lemma_ref = j.at("lemma_ref").get<std::string>();
    c.invariants_before = detail::colorings_from(j.at("invariants").at("before"));
    c.invariants_after = detail::colorings_from(j.at("invariants").at("after"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed certificate: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed certificate: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw FormatError(std::string("malformed certificate: ") + e.what());
  }
}

inline nlohmann::json parse_certificate_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("certificate is not valid JSON: ") + e.what());
  }
}

inline void save_certificate(const MengerCertificate& c, const std::filesystem::path& path) {
  write_file_atomic(path, certificate_to_string(c));
}

}  // namespace menger_knots
