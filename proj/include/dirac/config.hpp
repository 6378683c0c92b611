#ifndef DIRAC_TORUS_CONFIG_HPP
#define DIRAC_TORUS_CONFIG_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dirac/field.hpp"
#include "dirac/functional.hpp"
#include "dirac/solver.hpp"

namespace dirac {

// Flat `section.key = value` run configuration. Unknown keys are rejected,
// duplicates are errors naming both lines, and every constraint of the owning
// module is re-checked at parse time.
struct RunConfig {
  LatticeSpec lattice;           // lattice.l1/l2/l3/K, default unit lattice K=8
  GridDims grid_dims{0, 0, 0};   // grid.n1/n2/n3; 0 = auto 2(2K+1)
  double m = 1.0, a = 0.5;       // params.m / params.a
  Schedule schedule;             // params.eps_start / eps_steps / eps_ratio
  double external_const = 0.0;   // params.external_const
  double external_cos1 = 0.0;    // params.external_cos1
  std::string model_type = "soler_power";  // model.type: soler_power|smoothed|zero
  double model_p = 1.25, model_b = 0.0, model_delta = 0.0;
  // Optional overrides of the derived hypothesis constants.
  std::optional<double> A1, A2, A3, A4, A5, alpha, beta, nu, alpha1, alpha2;
  SolverConfig solver;
  std::string output_dir = "out";

  std::string raw_text;
  std::string hash;  // FNV-1a 64 of raw_text, hex

  GridDims effective_grid() const {
    return grid_dims.n1 > 0 ? grid_dims : GridDims::default_for(lattice.K);
  }
  NonlinearityModel make_model() const;
  std::unique_ptr<DiracOperator> make_operator() const;
  ProblemParams make_params(const DiracOperator& op) const;  // eps = eps_start
};

// Parses and validates; throws ConfigError with one message per problem
// (line numbers included). An empty file yields the documented defaults.
RunConfig parse_config(const std::string& text);

// Non-throwing variant: the collected error list (empty = valid).
std::vector<std::string> config_errors(const std::string& text);

std::string config_hash(const std::string& text);

}  // namespace dirac

#endif
