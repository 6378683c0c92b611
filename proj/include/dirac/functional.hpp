#ifndef DIRAC_TORUS_FUNCTIONAL_HPP
#define DIRAC_TORUS_FUNCTIONAL_HPP

#include <optional>
#include <vector>

#include "dirac/field.hpp"
#include "dirac/nonlinear.hpp"

namespace dirac {

// Optional external scalar field M(theta) >= 0 sampled on the collocation
// grid, entering the equation as -M psi and the action as -(1/2) int M |psi|^2.
// Admissibility: 0 < a <= a + M < m pointwise.
struct ExternalField {
  std::vector<double> values;  // one value per grid point; empty = absent
  bool present() const { return !values.empty(); }
};

// M(theta) = c0 + c1 * (1 + cos(2 pi theta^1 / l1)).
ExternalField make_external_cos1(const DiracOperator& op, double c0, double c1);

struct ProblemParams {
  double m = 1.0;
  double a = 0.5;
  double eps = 0.0;
  ExternalField external;

  // Checks 0 < a < m, m consistent with the operator, eps in [0,1], and the
  // external-field window max(a + M) < m, M >= 0. Throws ConfigError.
  void validate(const DiracOperator& op) const;
  // Largest value of a + M(x); equals a when no external field is set.
  double a_eff_max(const DiracOperator& op) const;
};

// One evaluation of the perturbed action
//   J_eps(psi) = int 1/2 <psi, D psi> - (a+M)/2 |psi|^2 - F(psi) - eps |psi|^alpha2 dv.
// J_eps = kinetic - mass_term - F_int - eps*pert_int holds by construction.
struct EvaluationBundle {
  double J_eps = 0.0;
  double kinetic = 0.0;    // int 1/2 <psi, D psi>
  double mass_term = 0.0;  // int (a+M)/2 |psi|^2
  double F_int = 0.0;      // int F(psi)
  double pert_int = 0.0;   // int |psi|^alpha2
  double residual_dual = 0.0;
};

// Cheap action value (single grid pass, no residual).
double action_value(const DiracOperator& op, const ProblemParams& params,
                    const NonlinearityModel& model, const SpinorField& field);

EvaluationBundle evaluate(const DiracOperator& op, const ProblemParams& params,
                          const NonlinearityModel& model, const SpinorField& field);

// Euler-Lagrange residual as mode coefficients:
//   r = D psi - a psi - M psi - dF(psi) - eps alpha2 |psi|^{alpha2-2} psi.
// r is the L2-gradient of J_eps: dJ_eps(psi)[v] = <r, v>_{L2,R}.
SpinorField el_residual(const DiracOperator& op, const ProblemParams& params,
                        const NonlinearityModel& model, const SpinorField& field);

// E-metric gradient |D|^{-1} r, so that <grad_E, v>_E = dJ_eps(psi)[v] and
// ||grad_E||_E = ||r||_{E*}. The descent flow moves along -grad_E.
SpinorField grad_E(const DiracOperator& op, const ProblemParams& params,
                   const NonlinearityModel& model, const SpinorField& field);

// Directional derivative dJ_eps(psi)[v] through the residual.
double directional_derivative(const DiracOperator& op, const ProblemParams& params,
                              const NonlinearityModel& model, const SpinorField& field,
                              const SpinorField& direction);

// Both sides of the Palais-Smale identity
//   2 J_eps(psi) - dJ_eps(psi)[psi]
//     = int dF(psi)[psi] - 2 F(psi) dv + eps (alpha2 - 2) int |psi|^{alpha2} dv,
// computed independently; gap = lhs - rhs is pure roundoff.
struct PsIdentity {
  double lhs = 0.0, rhs = 0.0, gap = 0.0;
};
PsIdentity ps_identity(const DiracOperator& op, const ProblemParams& params,
                       const NonlinearityModel& model, const SpinorField& field);

struct LinkingGeometry;  // solver.hpp

// Level bracket (c1, c2) with 0 < c1 < Lambda_1(eps) < c2: c1 is the sphere
// floor C_* of the linking geometry; c2 is a sampled upper bound of J_0 over
// the cylinder (eps = 0 dominates all eps), polished by local ascent.
// Defined with the sampling machinery in solver.cpp.
struct LevelBracket {
  double c1 = 0.0, c2 = 0.0;
};
LevelBracket level_bracket(const DiracOperator& op, const ProblemParams& params,
                           const NonlinearityModel& model, const LinkingGeometry& geometry);

}  // namespace dirac

#endif
