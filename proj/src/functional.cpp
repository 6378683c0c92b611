#include "dirac/functional.hpp"

#include <cmath>

#include "dirac/errors.hpp"

namespace dirac {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

inline Spinor4 load_point(const std::vector<Complex>& grid, std::size_t p) {
  return Spinor4(grid[p], grid[p + 1], grid[p + 2], grid[p + 3]);
}
}  // namespace

ExternalField make_external_cos1(const DiracOperator& op, double c0, double c1) {
  ExternalField ext;
  if (c0 == 0.0 && c1 == 0.0) return ext;
  const GridDims& g = op.grid();
  ext.values.resize(g.point_count());
  std::size_t idx = 0;
  for (int i1 = 0; i1 < g.n1; ++i1) {
    // theta^1 = l1 * i1 / n1, so 2 pi theta^1 / l1 = 2 pi i1 / n1.
    const double mval = c0 + c1 * (1.0 + std::cos(kTwoPi * i1 / g.n1));
    for (int i2 = 0; i2 < g.n2; ++i2)
      for (int i3 = 0; i3 < g.n3; ++i3) ext.values[idx++] = mval;
  }
  return ext;
}

void ProblemParams::validate(const DiracOperator& op) const {
  if (!(m > 0.0)) throw ConfigError("params require m > 0");
  if (!(a > 0.0 && a < m)) throw ConfigError("params require 0 < a < m");
  if (m != op.mass()) throw ConfigError("params.m disagrees with the operator mass");
  if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("params require eps in [0,1]");
  if (external.present()) {
    if (external.values.size() != op.grid().point_count())
      throw ConfigError("external field grid size mismatch");
    double mmax = 0.0, mmin = 1e300;
    for (const double v : external.values) {
      mmax = std::max(mmax, v);
      mmin = std::min(mmin, v);
    }
    if (mmin < 0.0) throw ConfigError("external field requires M >= 0");
    if (!(a + mmax < m)) throw ConfigError("external field requires 0 < a <= a + M < m");
  }
}

double ProblemParams::a_eff_max(const DiracOperator& op) const {
  (void)op;
  double amax = a;
  for (const double v : external.values) amax = std::max(amax, a + v);
  return amax;
}

namespace {

// Shared grid pass: mass corrections, F and perturbation integrals.
struct GridIntegrals {
  double l2_sq = 0.0;       // int |psi|^2 (by quadrature; equals Parseval value)
  double ext_mass = 0.0;    // int M |psi|^2
  double F_int = 0.0;       // int F(psi)
  double pert_int = 0.0;    // int |psi|^alpha2
};

GridIntegrals grid_integrals(const DiracOperator& op, const ProblemParams& params,
                             const NonlinearityModel& model,
                             const std::vector<Complex>& grid) {
  GridIntegrals gi;
  const double alpha2 = model.constants().alpha2;
  const bool ext = params.external.present();
  std::size_t point = 0;
  for (std::size_t p = 0; p < grid.size(); p += 4, ++point) {
    const Spinor4 psi = load_point(grid, p);
    const double mag2 = psi.squaredNorm();
    gi.l2_sq += mag2;
    if (ext) gi.ext_mass += params.external.values[point] * mag2;
    gi.F_int += model.F_value(psi);
    gi.pert_int += std::pow(mag2, 0.5 * alpha2);
  }
  const double w = op.quad_weight();
  gi.l2_sq *= w;
  gi.ext_mass *= w;
  gi.F_int *= w;
  gi.pert_int *= w;
  return gi;
}

}  // namespace

double action_value(const DiracOperator& op, const ProblemParams& params,
                    const NonlinearityModel& model, const SpinorField& field) {
  const GridIntegrals gi = grid_integrals(op, params, model, op.to_grid(field));
  const double kinetic = 0.5 * op.dirac_form(field);
  const double mass = 0.5 * params.a * gi.l2_sq + 0.5 * gi.ext_mass;
  return kinetic - mass - gi.F_int - params.eps * gi.pert_int;
}

EvaluationBundle evaluate(const DiracOperator& op, const ProblemParams& params,
                          const NonlinearityModel& model, const SpinorField& field) {
  const GridIntegrals gi = grid_integrals(op, params, model, op.to_grid(field));
  EvaluationBundle out;
  out.kinetic = 0.5 * op.dirac_form(field);
  out.mass_term = 0.5 * params.a * gi.l2_sq + 0.5 * gi.ext_mass;
  out.F_int = gi.F_int;
  out.pert_int = gi.pert_int;
  out.J_eps = out.kinetic - out.mass_term - out.F_int - params.eps * out.pert_int;
  out.residual_dual = op.norm_dual_E(el_residual(op, params, model, field));
  return out;
}

SpinorField el_residual(const DiracOperator& op, const ProblemParams& params,
                        const NonlinearityModel& model, const SpinorField& field) {
  // Pointwise part: dF(psi) + eps alpha2 |psi|^{alpha2-2} psi + M psi.
  std::vector<Complex> grid = op.to_grid(field);
  const double alpha2 = model.constants().alpha2;
  const bool ext = params.external.present();
  std::size_t point = 0;
  for (std::size_t p = 0; p < grid.size(); p += 4, ++point) {
    const Spinor4 psi = load_point(grid, p);
    Spinor4 n = model.dF(psi);
    if (params.eps > 0.0) {
      const double mag2 = psi.squaredNorm();
      if (mag2 > 0.0)
        n += (params.eps * alpha2 * std::pow(mag2, 0.5 * alpha2 - 1.0)) * psi;
    }
    if (ext) n += params.external.values[point] * psi;
    for (int c = 0; c < 4; ++c) grid[p + c] = n[c];
  }
  SpinorField nl = op.to_modes(grid);

  SpinorField r = op.apply_D(field);
  r.axpy(-params.a, field);
  r -= nl;
  return r;
}

SpinorField grad_E(const DiracOperator& op, const ProblemParams& params,
                   const NonlinearityModel& model, const SpinorField& field) {
  return op.apply_absD_pow(el_residual(op, params, model, field), -1.0);
}

double directional_derivative(const DiracOperator& op, const ProblemParams& params,
                              const NonlinearityModel& model, const SpinorField& field,
                              const SpinorField& direction) {
  return op.inner_l2_real(el_residual(op, params, model, field), direction);
}

PsIdentity ps_identity(const DiracOperator& op, const ProblemParams& params,
                       const NonlinearityModel& model, const SpinorField& field) {
  PsIdentity id;
  const double J = action_value(op, params, model, field);
  id.lhs = 2.0 * J - directional_derivative(op, params, model, field, field);

  const std::vector<Complex> grid = op.to_grid(field);
  const double alpha2 = model.constants().alpha2;
  double acc = 0.0, pert = 0.0;
  for (std::size_t p = 0; p < grid.size(); p += 4) {
    const Spinor4 psi = load_point(grid, p);
    acc += model.dF(psi).dot(psi).real() - 2.0 * model.F_value(psi);
    pert += std::pow(psi.squaredNorm(), 0.5 * alpha2);
  }
  const double w = op.quad_weight();
  id.rhs = w * acc + params.eps * (alpha2 - 2.0) * w * pert;
  id.gap = id.lhs - id.rhs;
  return id;
}

}  // namespace dirac
