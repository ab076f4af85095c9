#pragma once

// Command-line front end. run_cli parses argv with CLI11 and dispatches; it
// writes to the given streams so tests can drive it in-process.
// Exit codes: 0 success, 1 domain failure, 2 usage or I/O error.

#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "certificate.hpp"
#include "errors.hpp"
#include "invariants.hpp"
#include "io.hpp"
#include "knot.hpp"
#include "knot_io.hpp"
#include "menger.hpp"
#include "mesh.hpp"
#include "pipeline.hpp"
#include "verify.hpp"

namespace menger_knots {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr std::uint64_t kDefaultMaxCells = 10'000'000;

// Enumeration safety cap, overridable through MENGER_KNOTS_MAX_CELLS.
inline std::uint64_t max_cells_from_env() {
  const char* raw = std::getenv("MENGER_KNOTS_MAX_CELLS");
  if (raw == nullptr || *raw == '\0') return kDefaultMaxCells;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(raw, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != std::string(raw).size()) throw ParameterError(std::string("MENGER_KNOTS_MAX_CELLS is not a number: ") + raw);
  return v;
}

inline std::string colorings_string(const std::map<int, std::uint64_t>& m) {
  std::string s = "{";
  for (const auto& [p, c] : m) {
    if (s.size() > 1) s += ", ";
    s += std::to_string(p) + ": " + std::to_string(c);
  }
  return s + "}";
}

inline int cmd_menger_stats(const MengerParams& params, bool check_enumeration, std::ostream& out) {
  const RetentionReport r = retention_report(params);
  const BigInt total = total_count(params);
  out << "m=" << params.m << " n=" << params.n << " k=" << params.k << '\n';
  out << "retained " << r.retained_count << '\n';
  out << "total " << total << '\n';
  out << "removed " << r.removed_count << '\n';
  std::ostringstream ratio;
  ratio << std::fixed << std::setprecision(6)
        << static_cast<double>(r.removed_count.convert_to<long double>() / total.convert_to<long double>());
  out << "removal_ratio " << r.removed_count << "/" << total << " (" << ratio.str() << ")\n";
  if (check_enumeration) {
    const std::uint64_t counted = count_retained_exhaustive(params, max_cells_from_env());
    const bool agree = BigInt(counted) == r.retained_count;
    out << "enumeration " << counted << (agree ? " (agrees)" : " (MISMATCH)") << '\n';
    if (!agree) return kExitFailure;
  }
  return kExitOk;
}

inline int cmd_export_mesh(int k, const std::string& path, std::ostream& out) {
  const QuadMesh mesh = build_approximant_mesh({3, 1, k});
  std::ostringstream text;
  write_obj(mesh, text);
  write_file_atomic(path, text.str());
  out << "wrote " << path << ": " << mesh.vertices.size() << " vertices, " << mesh.quads.size() << " quads\n";
  return kExitOk;
}

// Loads and validates; an invalid knot is a usage error for commands that
// consume knots.
inline CubicalKnot load_valid_knot(const std::string& path) {
  CubicalKnot knot = load_knot_file(path);
  if (const auto v = validate(knot); !v) throw FormatError(path + ": invalid knot: " + v.message);
  return knot;
}

inline int cmd_knot_validate(const std::string& path, std::ostream& out) {
  const CubicalKnot knot = load_knot_file(path);
  if (const auto v = validate(knot); !v) {
    out << "invalid: " << v.message << '\n';
    return kExitFailure;
  }
  out << "valid: " << knot.size() << " edges, scale 3^" << knot.scale_exp()
      << (fits_domain(knot) ? ", inside its unit cube" : ", outside [0, 3^s]^3 (pipeline will translate)") << '\n';
  return kExitOk;
}

inline int cmd_knot_invariants(const std::string& path, std::uint64_t seed, std::ostream& out) {
  const CubicalKnot knot = load_valid_knot(path);
  const InvariantReport r = invariant_report(knot, audit_primes(), seed);
  const KnotDiagram d = project(knot, r.direction);
  out << "projection " << r.direction.to_string() << " (attempt " << r.attempts << ")\n";
  out << "crossings " << r.crossings << '\n';
  out << "writhe " << d.writhe() << '\n';
  std::string gauss = gauss_code(d);
  while (!gauss.empty() && gauss.back() == '\n') gauss.pop_back();
  out << "gauss " << gauss << '\n';
  out << "fox_colorings " << colorings_string(r.colorings) << '\n';
  return kExitOk;
}

inline int cmd_pipeline_run(const std::string& in, const PipelineConfig& config, const std::string& out_path,
                            std::ostream& out, std::ostream& err) {
  const CubicalKnot knot = load_valid_knot(in);
  MengerCertificate cert;
  try {
    cert = embed_in_menger(knot, config);
  } catch (const PipelineFailure& e) {
    err << "pipeline failed: " << e.what() << '\n';
    return kExitFailure;
  }
  save_certificate(cert, out_path);
  std::size_t moves = 0;
  std::size_t rescales = 0;
  for (const auto& e : cert.log) {
    moves += e.op == LogEntry::Op::move ? 1 : 0;
    rescales += e.op == LogEntry::Op::rescale ? 1 : 0;
  }
  out << "moves " << moves << '\n';
  out << "rescales " << rescales << '\n';
  out << "final_scale " << cert.knot.scale_exp() << '\n';
  out << "final_edges " << cert.knot.size() << '\n';
  out << "invariants_before " << colorings_string(cert.invariants_before) << '\n';
  out << "invariants_after " << colorings_string(cert.invariants_after) << '\n';
  out << "certificate " << out_path << '\n';
  return kExitOk;
}

inline int cmd_cert_verify(const std::string& cert_path, const std::string& original_path, std::ostream& out) {
  const CubicalKnot original = load_knot_file(original_path);
  const VerificationResult r = verify_certificate_text(read_file(cert_path), original);
  if (!r) {
    out << "FAILED [" << r.check << "] " << r.message << '\n';
    return kExitFailure;
  }
  out << "certificate verified\n";
  return kExitOk;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cubical knots in the Menger sponge"};
  app.name("menger-knots");
  app.require_subcommand(1);

  auto* menger = app.add_subcommand("menger", "Menger approximants");
  menger->require_subcommand(1);
  MengerParams params;
  bool check_enumeration = false;
  auto* stats = menger->add_subcommand("stats", "retained-cube counts for M^m_n(k)");
  stats->add_option("--m", params.m, "ambient dimension")->capture_default_str();
  stats->add_option("--n", params.n, "skeleton dimension")->capture_default_str();
  stats->add_option("--k", params.k, "depth")->capture_default_str();
  stats->add_flag("--check-enumeration", check_enumeration, "cross-check against exhaustive enumeration");

  int mesh_k = 1;
  std::string mesh_out;
  auto* export_mesh = menger->add_subcommand("export-mesh", "OBJ boundary mesh of M^3_1(k)");
  export_mesh->add_option("--k", mesh_k, "depth (at most 5)")->capture_default_str();
  export_mesh->add_option("--out", mesh_out, "output .obj path")->required();

  auto* knot = app.add_subcommand("knot", "cubical knot files");
  knot->require_subcommand(1);
  std::string knot_in;
  std::uint64_t seed = 0;
  auto* knot_validate = knot->add_subcommand("validate", "check that a file is a lattice knot");
  knot_validate->add_option("--in", knot_in, "knot file")->required();
  auto* knot_invariants = knot->add_subcommand("invariants", "Fox coloring counts for p = 3, 5, 7");
  knot_invariants->add_option("--in", knot_in, "knot file")->required();
  knot_invariants->add_option("--seed", seed, "projection seed")->capture_default_str();

  auto* pipeline = app.add_subcommand("pipeline", "isotopy into the sponge");
  pipeline->require_subcommand(1);
  PipelineConfig config;
  std::string cert_out;
  auto* run = pipeline->add_subcommand("run", "embed a knot and write a certificate");
  run->add_option("--in", knot_in, "knot file")->required();
  run->add_option("--depth", config.target_depth, "target depth s >= 1")->required();
  run->add_option("--seed", config.seed, "seed for tie-breaking and projections")->capture_default_str();
  run->add_option("--out", cert_out, "certificate path")->required();
  run->add_option("--max-autoscale", config.max_autoscale, "extra factor-3 rescalings allowed")->capture_default_str();
  run->add_option("--budget", config.search_budget, "search node cap per reroute")->capture_default_str();

  auto* cert = app.add_subcommand("cert", "certificates");
  cert->require_subcommand(1);
  std::string cert_in;
  std::string original;
  auto* verify = cert->add_subcommand("verify", "re-check a certificate against its original knot");
  verify->add_option("--in", cert_in, "certificate file")->required();
  verify->add_option("--original", original, "original knot file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (stats->parsed()) return cmd_menger_stats(params, check_enumeration, out);
    if (export_mesh->parsed()) return cmd_export_mesh(mesh_k, mesh_out, out);
    if (knot_validate->parsed()) return cmd_knot_validate(knot_in, out);
    if (knot_invariants->parsed()) return cmd_knot_invariants(knot_in, seed, out);
    if (run->parsed()) {
      config.check();
      return cmd_pipeline_run(knot_in, config, cert_out, out, err);
    }
    if (verify->parsed()) return cmd_cert_verify(cert_in, original, out);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ResourceError& e) {
    err << "refused: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const GenericityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitFailure;
  }
  err << "error: no command\n";
  return kExitUsage;
}

}  // namespace menger_knots
