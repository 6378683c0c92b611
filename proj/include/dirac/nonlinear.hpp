#ifndef DIRAC_TORUS_NONLINEAR_HPP
#define DIRAC_TORUS_NONLINEAR_HPP

#include <functional>
#include <string>
#include <vector>

#include "dirac/clifford.hpp"
#include "dirac/field.hpp"

namespace dirac {

// Growth/coercivity constants declared with a model. The shipped defaults
// for the power model p = 5/4, b = 0 satisfy every hypothesis with explicit
// constants: A1 = 1 (alpha1 = alpha2 = 2p), alpha = 2p exactly by homogeneity,
// A3 = 1, A4 = 0, nu = p, A5 = 2p with beta = 4 in (3, p/(p-1)].
struct HypothesisConstants {
  double A1 = 1.0, A2 = 10.0, A3 = 1.0, A4 = 0.0, A5 = 2.5;
  double alpha = 2.5;           // (F3): alpha F <= dF[psi], alpha > 2
  double beta = 4.0;            // (F5), beta > 3
  double nu = 1.25;             // (F4), nu > 1
  double alpha1 = 2.5, alpha2 = 2.5;  // (F1), 2 < alpha1 <= alpha2 < 3
  void validate() const;
};

enum class ModelKind {
  SolerPower,  // F = |q|^p + b |q5|^p,  q = psibar psi, q5 = psibar gamma5 psi
  Smoothed,    // F_delta = (q^2+d^2)^{p/2} - d^p + b[(q5^2+d^2)^{p/2} - d^p]
  SolerG,      // F = G(q)/2 with user-supplied G, G', G''
  Zero,        // F = 0; quadratic-only sanity model for solver tests
};

// A concrete nonlinearity F with its derivative and Hessian action. The
// gradient is taken with respect to the real inner product on C^4 ~ R^8.
// Immutable after construction.
class NonlinearityModel {
 public:
  using ScalarFn = std::function<double(double)>;

  static NonlinearityModel soler_power(double p, double b);
  static NonlinearityModel smoothed(double p, double b, double delta);
  static NonlinearityModel soler_g(ScalarFn G, ScalarFn dG, ScalarFn ddG,
                                   HypothesisConstants constants);
  static NonlinearityModel zero();

  ModelKind kind() const { return kind_; }
  double p() const { return p_; }
  double b() const { return b_; }
  double delta() const { return delta_; }
  const HypothesisConstants& constants() const { return hyp_; }
  NonlinearityModel& set_constants(const HypothesisConstants& c) {
    hyp_ = c;
    return *this;
  }

  // Pointwise model. F_value >= 0 everywhere; F(0) = 0, dF(0) = 0, and for
  // the power family dF vanishes continuously on the null cone {q = 0}
  // (sign(0) = 0 convention, valid since p > 1).
  double F_value(const Spinor4& psi) const;
  Spinor4 dF(const Spinor4& psi) const;

  // Symmetric bilinear Hessian action. The unsmoothed power model is not C^2
  // on the null cone; hess_delta > 0 substitutes the smoothed Hessian there
  // (used inside Newton), hess_delta < 0 keeps the model's own delta.
  Spinor4 hessF_apply(const Spinor4& psi, const Spinor4& v,
                      double hess_delta = -1.0) const;

 private:
  NonlinearityModel() = default;
  ModelKind kind_ = ModelKind::SolerPower;
  double p_ = 1.25, b_ = 0.0, delta_ = 0.0;
  ScalarFn G_, dG_, ddG_;
  HypothesisConstants hyp_;
};

// Integral of F over the torus by oversampled collocation quadrature.
double F_integral(const DiracOperator& op, const NonlinearityModel& model,
                  const SpinorField& field);

// Mode coefficients of the pointwise gradient dF(psi(.)). The fraction of
// grid-spectrum energy above the truncation (aliasing tail) is reported
// through `tail_fraction` when non-null.
SpinorField dF_field(const DiracOperator& op, const NonlinearityModel& model,
                     const SpinorField& field, double* tail_fraction = nullptr);

struct HypothesisCheck {
  std::string name;
  double worst_margin = 0.0;  // min over samples of (rhs - lhs); >= 0 passes
  bool pass = false;
  bool informative = false;  // reported but not counted toward all_pass
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  bool all_pass = true;
};

// Samples spinors up to |psi| = radius with a deterministic seed and checks
// (F1)-(F5) with the declared constants. Violations are reported, not thrown.
// The curvature part of (F2) is informative only: the power model's Hessian
// blows up near the null cone, so no finite A2 can pass a dense sampling.
HypothesisReport verify_hypotheses(const NonlinearityModel& model, int sample_count,
                                   double radius, std::uint64_t seed = 1);

}  // namespace dirac

#endif
