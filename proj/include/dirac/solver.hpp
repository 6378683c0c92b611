#ifndef DIRAC_TORUS_SOLVER_HPP
#define DIRAC_TORUS_SOLVER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dirac/functional.hpp"

namespace dirac {

// Linking geometry of the min-max search: the cylinder
//   C1(R) = { psi^- + lambda e : ||psi^-||_E <= R, lambda in [0,R] }
// in (negative space + R e) against the sphere B+(r) in the positive space,
// with the uniform floor J_eps|_{B+(r)} >= C_* for all eps in [0,1].
struct LinkingGeometry {
  SpinorField e;  // unit-E-norm constant upper spinor; P- e = 0, D e = m e
  double R = 0.0;
  double r = 0.0;
  double C_star = 0.0;
  // E-orthonormal complex basis of the sampled part of H^{1/2,-}: the
  // negative eigendirections with |lambda| <= neg_band * m, ordered by
  // (|lambda|, mode index, eigenvector index).
  std::vector<SpinorField> neg_basis;
  std::vector<double> neg_lambda;
  int neg_dim() const { return static_cast<int>(neg_basis.size()); }
};

struct SolverConfig {
  std::uint64_t seed = 12345;
  double neg_band = 3.0;  // keep negative directions with |lambda| <= neg_band*m

  // Linking constants.
  int embed_samples = 200;      // random fields for the S_q estimate
  double embed_inflation = 2.0; // safety factor on the sampled S_q
  int r_grid = 10000;           // 1-D grid for the sphere-floor maximization
  int c2_samples = 10000;       // cylinder samples for the c2 estimate
  int c2_polish_iters = 60;
  int audit_samples = 1000;

  // Flow / min-max.
  int cloud_lambda = 32;
  int cloud_ball = 16;
  double lambda_floor_factor = 1e-5;  // smallest ladder rung = factor * R
  double flow_tol_level = 1e-9;
  int flow_max_sweeps = 4000;
  int flow_max_refinements = 24;
  int refine_subdivisions = 6;
  double armijo_c = 1e-4;
  double armijo_step0 = 1.0;
  double flow_grad_goal_rel = 1e-2;  // enter Newton once grad < rel * ||psi||_E

  // Newton-Krylov refinement.
  double newton_tol = 1e-12;
  double final_tol = 1e-12;
  int newton_max_iter = 60;
  int gmres_restart = 80;
  int gmres_max_iter = 320;
  double hess_delta = 1e-6;     // smoothing for the Newton Hessian only
  double trivial_floor = 1e-6;  // reject solutions with ||psi||_L2 below
};

// --- Linking constants -------------------------------------------------------

// Largest positive root R0 of  (1/2) R^2 - A3 vol^{1-nu} (2m)^{-nu} R^{2nu}
//                              + A4 vol = 0.
// Beyond R0 the top-face bound of the cylinder is strictly negative.
double choose_R_root(const NonlinearityModel& model, double vol, double m);

// 1.05 * R0: the shipped cylinder radius. Independent of eps and of the
// truncation.
double choose_R(const NonlinearityModel& model, double vol, double m);

struct SphereFloor {
  double r = 0.0;
  double C_star = 0.0;
  double S_alpha1 = 0.0, S_alpha2 = 0.0;  // inflated embedding constants
};

// Sphere radius r in (0,R) and floor C_* > 0 valid for every eps in [0,1]
// (the eps-term enters at its worst case eps = 1). Embedding constants
// ||psi||_{L^q} <= S_q ||psi||_E are estimated on random normalized fields of
// H^{1/2,+} and inflated for safety; the floor uses the spectral-gap bound
// ||psi^+||_{L2}^2 <= ||psi^+||_E^2 / m to absorb the frequency term.
// Throws SolverError when no positive floor exists at this truncation.
SphereFloor choose_r(const DiracOperator& op, const ProblemParams& params,
                     const NonlinearityModel& model, double R, const SolverConfig& cfg);

LinkingGeometry build_geometry(const DiracOperator& op, const ProblemParams& params,
                               const NonlinearityModel& model, const SolverConfig& cfg);

// --- Boundary audit ----------------------------------------------------------

struct BoundaryAudit {
  double face_neg_sphere = 0.0;  // max J on { ||psi^-|| = R }
  double face_lambda_0 = 0.0;    // max J on { lambda = 0 }
  double face_lambda_R = 0.0;    // max J on { lambda = R }
  double max_J = 0.0;
  bool pass = false;  // max_J <= 1e-9
};

BoundaryAudit boundary_audit(const DiracOperator& op, const LinkingGeometry& geometry,
                             const ProblemParams& params, const NonlinearityModel& model,
                             int samples, std::uint64_t seed);

// --- Gradient-flow min-max ---------------------------------------------------

struct FlowOptions {
  bool enforce_bracket = true;  // level-collapse / witness checks against (c1,c2)
  double c1 = 0.0, c2 = 0.0;
  double freeze_floor = 0.0;  // trajectories at or below never matter again
};

struct FlowResult {
  double lambda_est = 0.0;   // J_eps at the returned candidate
  SpinorField candidate;     // near-critical hover point (Newton start)
  double final_S = 0.0;      // last value of the cloud sup
  double best_grad_E = 0.0;  // E-norm of grad at the candidate
  int sweeps = 0;
  int refinements = 0;
  bool within_bracket = true;  // lambda_est in (c1 - tol, c2 + tol); reported
};

// Discretizes the cylinder by a deterministic cloud (geometric lambda ladder
// x low-discrepancy psi^- ball), advances every point by adaptive Armijo
// descent along -grad_E J_eps, and tracks the cloud sup S(t). The ladder is
// adaptively refined around the trajectory of smallest gradient so the sup
// stalls at the trapped saddle level instead of draining past it.
FlowResult flow_minmax(const DiracOperator& op, const LinkingGeometry& geometry,
                       const ProblemParams& params, const NonlinearityModel& model,
                       const SolverConfig& cfg, const FlowOptions& opts);

// --- Newton refinement and continuation -------------------------------------

struct SolutionBounds {
  double F_int = 0.0;
  double pert_int = 0.0;
  double l2 = 0.0, l3 = 0.0, h1 = 0.0;
  double qbar = 0.0;  // int psibar psi
};

struct ContinuationRecord {
  double eps = 0.0;
  SpinorField field;
  double level = 0.0;
  double residual_dual = 0.0;
  SolutionBounds bounds;
  int newton_iters = 0;
};

// Damped Newton on r(psi) = 0 with linearization D - a - M - HessF_eps(psi),
// inner solves by GMRES right-preconditioned with the diagonal symbol
// (D - a)^{-1}. The Hessian uses `hess_delta` smoothing near the null cone.
// Errors: max iterations, line-search breakdown, convergence to the trivial
// solution (||psi||_L2 < trivial_floor).
ContinuationRecord newton_refine(const DiracOperator& op, const SpinorField& start,
                                 const ProblemParams& params, const NonlinearityModel& model,
                                 const SolverConfig& cfg, double tol);

struct Schedule {
  double eps0 = 0.5;
  int steps = 12;
  double ratio = 0.5;
  // eps0 * ratio^k for the first steps-1 stages, then exactly 0.
  std::vector<double> ladder() const;
};

struct ContinuationResult {
  std::vector<ContinuationRecord> records;
  LevelBracket bracket;
  BoundaryAudit audit;
  FlowResult flow;
};

// The full eps -> 0 scheme: linking constants and bracket, boundary audit,
// flow min-max + Newton at eps_0, then warm-started Newton down the ladder
// with the final stage at eps = 0.
ContinuationResult run_continuation(const DiracOperator& op, ProblemParams params,
                                    const NonlinearityModel& model, const Schedule& schedule,
                                    const SolverConfig& cfg);

// --- Uniform-bound monitors ---------------------------------------------------

struct BoundCheck {
  std::string name;
  double lhs = 0.0, rhs = 0.0;
  bool pass = false;
  bool informative = false;
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  bool all_pass = true;
};

// Evaluates the uniform-estimate chain at a converged record with 1e-8
// relative slack: F_int <= 2 level/(alpha-2), eps*pert_int under the same
// bound, the dF pairing bound 2 level alpha/(alpha-2), and the qbar chain
// (m-a) int psibar psi <= (m-a) vol^{1-1/nu} ((F_int + A4 vol)/A3)^{1/nu}.
// L3/H1 norms are reported for boundedness inspection across stages.
BoundReport bound_report(const DiracOperator& op, const ContinuationRecord& record,
                         const NonlinearityModel& model, const ProblemParams& params);

}  // namespace dirac

#endif
