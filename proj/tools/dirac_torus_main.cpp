// dirac-torus: periodic solutions of the nonlinear Dirac equation on T^3.
//
//   dirac-torus <verify|spectrum|solve|continue|export> --config <path> [--out <dir>]
//
// Exit codes: 0 ok, 2 config error, 3 verification failure, 4 solver failure.

#include <iostream>

#include <CLI11.hpp>

#include "dirac/errors.hpp"
#include "dirac/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pseudospectral linking/continuation solver for the nonlinear Dirac "
               "equation on the 3-torus"};
  app.require_subcommand(1);

  std::string config_path, out_dir, snapshot_path;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", config_path, "run configuration file")->required();
    if (needs_out) sub->add_option("--out", out_dir, "output directory (default: output.dir)");
  };

  CLI::App* cmd_verify = app.add_subcommand("verify", "run identity/hypothesis/gradient suites");
  add_common(cmd_verify, false);
  CLI::App* cmd_spectrum = app.add_subcommand("spectrum", "write the eigenvalue table CSV");
  add_common(cmd_spectrum, true);
  CLI::App* cmd_solve = app.add_subcommand("solve", "one min-max + Newton stage at eps_start");
  add_common(cmd_solve, true);
  CLI::App* cmd_continue = app.add_subcommand("continue", "full eps -> 0 continuation ladder");
  add_common(cmd_continue, true);
  CLI::App* cmd_export = app.add_subcommand("export", "convert a snapshot to a grid CSV");
  add_common(cmd_export, true);
  cmd_export->add_option("--snapshot", snapshot_path, "snapshot file to export")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const dirac::RunConfig cfg = dirac::load_config_file(config_path);
    if (cmd_verify->parsed()) dirac::run_verify(cfg, std::cout);
    if (cmd_spectrum->parsed()) dirac::run_spectrum(cfg, out_dir, std::cout);
    if (cmd_solve->parsed()) dirac::run_solve(cfg, out_dir, std::cout);
    if (cmd_continue->parsed()) dirac::run_continue(cfg, out_dir, std::cout);
    if (cmd_export->parsed()) dirac::run_export(cfg, snapshot_path, out_dir, std::cout);
  } catch (const dirac::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const dirac::VerificationError& err) {
    std::cerr << "verification failure: " << err.what() << "\n";
    return 3;
  } catch (const dirac::SolverError& err) {
    std::cerr << "solver failure: " << err.what() << "\n";
    return 4;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
