#ifndef DIRAC_TORUS_RUNNER_HPP
#define DIRAC_TORUS_RUNNER_HPP

#include <iosfwd>
#include <string>

#include "dirac/config.hpp"

namespace dirac {

// Subcommand entry points. Each writes its artifacts under `out_dir`
// (falling back to the config's output.dir) plus a manifest, and reports to
// `log`. Exit codes: 0 ok, 2 config error, 3 verification failure,
// 4 solver failure -- raised through the exception taxonomy in errors.hpp.

void run_verify(const RunConfig& cfg, std::ostream& log);
void run_spectrum(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
void run_solve(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
void run_continue(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
void run_export(const RunConfig& cfg, const std::string& snapshot_path,
                const std::string& out_dir, std::ostream& log);

RunConfig load_config_file(const std::string& path);

// Formats a double with round-trip precision (%.17g); all CSV output goes
// through this so identical runs produce bit-identical files.
std::string format_g17(double v);

}  // namespace dirac

#endif
