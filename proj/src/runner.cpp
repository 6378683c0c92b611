#include "dirac/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "dirac/errors.hpp"
#include "dirac/rng.hpp"
#include "dirac/snapshot.hpp"

namespace dirac {

namespace fs = std::filesystem;

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

namespace {

constexpr const char* kVersion = "1.0.0";

std::string ensure_out_dir(const RunConfig& cfg, const std::string& override_dir) {
  const std::string dir = override_dir.empty() ? cfg.output_dir : override_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

void write_manifest(const RunConfig& cfg, const std::string& dir) {
  nlohmann::json manifest;
  manifest["tool"] = "dirac-torus";
  manifest["version"] = kVersion;
  manifest["config_hash"] = cfg.hash;
  manifest["seed"] = cfg.solver.seed;
  std::ofstream os(dir + "/manifest.json");
  os << manifest.dump(2) << "\n";
}

void write_diagnostics_csv(const std::string& path, const std::vector<ContinuationRecord>& records,
                           const LevelBracket& bracket) {
  std::ofstream os(path);
  os << "stage,eps,level,residual_dual,F_int,pert_int,l2,l3,h1,qbar,c1,c2\n";
  for (std::size_t k = 0; k < records.size(); ++k) {
    const ContinuationRecord& r = records[k];
    os << k << ',' << format_g17(r.eps) << ',' << format_g17(r.level) << ','
       << format_g17(r.residual_dual) << ',' << format_g17(r.bounds.F_int) << ','
       << format_g17(r.bounds.pert_int) << ',' << format_g17(r.bounds.l2) << ','
       << format_g17(r.bounds.l3) << ',' << format_g17(r.bounds.h1) << ','
       << format_g17(r.bounds.qbar) << ',' << format_g17(bracket.c1) << ','
       << format_g17(bracket.c2) << '\n';
  }
}

}  // namespace

void run_verify(const RunConfig& cfg, std::ostream& log) {
  bool ok = true;

  // Clifford identities.
  const CliffordReport clifford = verify_clifford();
  log << "clifford identities: " << clifford.checks.size() << " checks, "
      << (clifford.all_pass ? "all pass" : "FAILED") << "\n";
  if (!clifford.all_pass) {
    ok = false;
    for (const auto& c : clifford.checks)
      if (!c.pass) log << "  failed: " << c.name << " (dev " << c.max_abs_dev << ")\n";
  }

  // Spectrum: every per-mode eigendecomposition cross-checks itself at
  // construction; verify the aggregated gap and symmetry on top.
  const auto op = cfg.make_operator();
  const auto table = spectrum_table(cfg.lattice, cfg.m);
  double min_abs = 1e300;
  bool symmetric = true;
  for (const auto& entry : table) {
    min_abs = std::min(min_abs, std::abs(entry.lambda));
    bool found = false;
    for (const auto& other : table)
      if (std::abs(other.lambda + entry.lambda) < 1e-9 * std::max(1.0, std::abs(entry.lambda)) &&
          other.multiplicity == entry.multiplicity)
        found = true;
    symmetric = symmetric && found;
  }
  const bool gap_ok = std::abs(min_abs - cfg.m) < 1e-12 * std::max(1.0, cfg.m);
  log << "spectrum: " << op->modes().size() << " modes, gap " << format_g17(min_abs)
      << (gap_ok ? " (= m)" : " (EXPECTED m)") << ", symmetric "
      << (symmetric ? "yes" : "NO") << "\n";
  ok = ok && gap_ok && symmetric;

  // Hypotheses of the configured model.
  const NonlinearityModel model = cfg.make_model();
  const HypothesisReport hyp = verify_hypotheses(model, 2000, 3.0, cfg.solver.seed);
  log << "hypotheses: " << (hyp.all_pass ? "all pass" : "FAILED") << "\n";
  for (const auto& c : hyp.checks)
    log << "  " << (c.pass ? "pass " : (c.informative ? "info " : "FAIL ")) << c.name
        << " (worst margin " << format_g17(c.worst_margin) << ")\n";
  ok = ok && hyp.all_pass;

  // Gradient consistency: analytic directional derivative against central
  // finite differences on a few random fields.
  {
    ProblemParams params = cfg.make_params(*op);
    const CounterRng rng(cfg.solver.seed, "verify-gradient");
    std::uint64_t ctr = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      SpinorField psi = op->make_field(), v = op->make_field();
      for (std::size_t i = 0; i < psi.coeffs().size(); ++i) {
        const double decay = 1.0 / (1.0 + op->modes()[i / 4].mu_abs);
        psi.coeffs()[i] = 0.3 * decay * Complex(rng.gaussian(ctr++), rng.gaussian(ctr++));
        v.coeffs()[i] = decay * Complex(rng.gaussian(ctr++), rng.gaussian(ctr++));
      }
      const double h = 1e-4;
      SpinorField plus = psi, minus = psi;
      plus.axpy(h, v);
      minus.axpy(-h, v);
      const NonlinearityModel m2 = cfg.make_model();
      const double fd =
          (action_value(*op, params, m2, plus) - action_value(*op, params, m2, minus)) /
          (2.0 * h);
      const double an = directional_derivative(*op, params, m2, psi, v);
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
    }
    const bool grad_ok = worst < 1e-5;
    log << "gradient consistency: worst relative error " << format_g17(worst)
        << (grad_ok ? " (pass)" : " (FAIL)") << "\n";
    ok = ok && grad_ok;
  }

  if (!ok) throw VerificationError("verification failed (see report above)");
  log << "verify: all suites green\n";
}

void run_spectrum(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const std::string dir = ensure_out_dir(cfg, out_dir);
  const std::string path = dir + "/spectrum.csv";
  std::ofstream os(path);
  os << "n1,n2,n3,mu_abs,lambda\n";
  for (const DualMode& mode : enumerate_modes(cfg.lattice)) {
    const double root = std::sqrt(mode.mu_abs * mode.mu_abs + cfg.m * cfg.m);
    for (const double lambda : {root, root, -root, -root})
      os << mode.n[0] << ',' << mode.n[1] << ',' << mode.n[2] << ','
         << format_g17(mode.mu_abs) << ',' << format_g17(lambda) << '\n';
  }
  write_manifest(cfg, dir);
  log << "spectrum written to " << path << "\n";
}

void run_solve(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const std::string dir = ensure_out_dir(cfg, out_dir);
  const auto op = cfg.make_operator();
  ProblemParams params = cfg.make_params(*op);
  const NonlinearityModel model = cfg.make_model();

  const LinkingGeometry geometry = build_geometry(*op, params, model, cfg.solver);
  const LevelBracket bracket = level_bracket(*op, params, model, geometry);
  log << "linking: R = " << format_g17(geometry.R) << ", r = " << format_g17(geometry.r)
      << ", c1 = " << format_g17(bracket.c1) << ", c2 = " << format_g17(bracket.c2) << "\n";

  const BoundaryAudit audit =
      boundary_audit(*op, geometry, params, model, cfg.solver.audit_samples, cfg.solver.seed);
  log << "boundary audit: max J = " << format_g17(audit.max_J)
      << (audit.pass ? " (pass)" : " (FAIL)") << "\n";
  if (!audit.pass) throw SolverError("boundary audit failed");

  FlowOptions opts;
  opts.enforce_bracket = true;
  opts.c1 = bracket.c1;
  opts.c2 = bracket.c2;
  const FlowResult flow = flow_minmax(*op, geometry, params, model, cfg.solver, opts);
  log << "flow: level estimate " << format_g17(flow.lambda_est) << " after " << flow.sweeps
      << " sweeps, " << flow.refinements << " refinements\n";

  const ContinuationRecord rec =
      newton_refine(*op, flow.candidate, params, model, cfg.solver, cfg.solver.newton_tol);
  log << "newton: level " << format_g17(rec.level) << ", residual "
      << format_g17(rec.residual_dual) << ", |psi|_L2 " << format_g17(rec.bounds.l2) << "\n";

  save_snapshot(dir + "/solution.snap", rec.field, params.m, params.a, params.eps);
  write_diagnostics_csv(dir + "/diagnostics.csv", {rec}, bracket);
  write_manifest(cfg, dir);
  log << "solve artifacts in " << dir << "\n";
}

void run_continue(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const std::string dir = ensure_out_dir(cfg, out_dir);
  const auto op = cfg.make_operator();
  ProblemParams params = cfg.make_params(*op);
  const NonlinearityModel model = cfg.make_model();

  const ContinuationResult result =
      run_continuation(*op, params, model, cfg.schedule, cfg.solver);
  log << "bracket: c1 = " << format_g17(result.bracket.c1)
      << ", c2 = " << format_g17(result.bracket.c2) << "\n";

  for (std::size_t k = 0; k < result.records.size(); ++k) {
    const ContinuationRecord& r = result.records[k];
    char name[64];
    std::snprintf(name, sizeof name, "/stage_%02zu.snap", k);
    save_snapshot(dir + name, r.field, params.m, params.a, r.eps);
    log << "stage " << k << ": eps " << format_g17(r.eps) << ", level " << format_g17(r.level)
        << ", residual " << format_g17(r.residual_dual) << "\n";

    ProblemParams stage_params = params;
    stage_params.eps = r.eps;
    const BoundReport bounds = bound_report(*op, r, model, stage_params);
    if (!bounds.all_pass) {
      for (const auto& c : bounds.checks)
        if (!c.pass)
          log << "  bound violated: " << c.name << " lhs " << format_g17(c.lhs) << " rhs "
              << format_g17(c.rhs) << "\n";
      throw SolverError("uniform-bound monitor failed at stage " + std::to_string(k));
    }
  }
  save_snapshot(dir + "/final.snap", result.records.back().field, params.m, params.a, 0.0);
  write_diagnostics_csv(dir + "/diagnostics.csv", result.records, result.bracket);
  write_manifest(cfg, dir);
  log << "continuation artifacts in " << dir << "\n";
}

void run_export(const RunConfig& cfg, const std::string& snapshot_path,
                const std::string& out_dir, std::ostream& log) {
  const std::string dir = ensure_out_dir(cfg, out_dir);
  SnapshotHeader hdr;
  const SpinorField field = load_snapshot(snapshot_path, cfg.lattice, &hdr);
  const DiracOperator op(field.lattice(), field.grid(), hdr.m > 0 ? hdr.m : cfg.m);
  const std::vector<Complex> grid = op.to_grid(field);

  const std::string path = dir + "/grid.csv";
  std::ofstream os(path);
  os << "i1,i2,i3,theta1,theta2,theta3,re1,im1,re2,im2,re3,im3,re4,im4\n";
  const GridDims& g = field.grid();
  std::size_t idx = 0;
  for (int i1 = 0; i1 < g.n1; ++i1)
    for (int i2 = 0; i2 < g.n2; ++i2)
      for (int i3 = 0; i3 < g.n3; ++i3) {
        os << i1 << ',' << i2 << ',' << i3 << ','
           << format_g17(cfg.lattice.l1 * i1 / g.n1) << ','
           << format_g17(cfg.lattice.l2 * i2 / g.n2) << ','
           << format_g17(cfg.lattice.l3 * i3 / g.n3);
        for (int c = 0; c < 4; ++c) {
          os << ',' << format_g17(grid[idx].real()) << ',' << format_g17(grid[idx].imag());
          ++idx;
        }
        os << '\n';
      }
  write_manifest(cfg, dir);
  log << "grid written to " << path << "\n";
}

}  // namespace dirac
