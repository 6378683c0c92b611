#ifndef DIRAC_TORUS_ERRORS_HPP
#define DIRAC_TORUS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dirac {

// Exit-code taxonomy of the CLI: 2 config, 3 verification, 4 solver.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct VerificationError : std::runtime_error {
  explicit VerificationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dirac

#endif
