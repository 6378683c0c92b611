#include <doctest.h>

#include <cmath>

#include "dirac/errors.hpp"
#include "dirac/functional.hpp"
#include "dirac/rng.hpp"
#include "dirac/solver.hpp"

using namespace dirac;

namespace {

SpinorField random_field(const DiracOperator& op, std::uint64_t seed, double amp = 0.5) {
  const CounterRng rng(seed, "fn-random");
  SpinorField f = op.make_field();
  std::uint64_t ctr = 0;
  for (std::size_t i = 0; i < f.coeffs().size(); ++i) {
    const double decay = 1.0 / (1.0 + op.modes()[i / 4].mu_abs);
    f.coeffs()[i] = amp * decay * Complex(rng.gaussian(ctr++), rng.gaussian(ctr++));
  }
  return f;
}

SpinorField constant_field(const DiracOperator& op, double s) {
  SpinorField f = op.make_field();
  f.at(mode_index(op.lattice(), 0, 0, 0), 0) = s;
  return f;
}

// Smallest |psibar psi| over the collocation grid. Finite-difference oracles
// need generic fields: the power nonlinearity is not C^2 on the null cone, so
// grid points with tiny q poison an h^2 FD comparison.
double min_cone_distance(const DiracOperator& op, const SpinorField& f) {
  const auto grid = op.to_grid(f);
  double worst = 1e300;
  for (std::size_t p = 0; p < grid.size(); p += 4) {
    const Spinor4 psi(grid[p], grid[p + 1], grid[p + 2], grid[p + 3]);
    worst = std::min(worst, std::abs(dirac_bilinear(psi)));
  }
  return worst;
}

struct Setup {
  LatticeSpec lat{1, 1, 1, 2};
  DiracOperator op{lat, GridDims::default_for(2), 1.0};
  NonlinearityModel model = NonlinearityModel::soler_power(1.25, 0.0);
  ProblemParams params;
  Setup() {
    params.m = 1.0;
    params.a = 0.5;
    params.eps = 0.0;
  }
};

}  // namespace

TEST_CASE("evaluate: zero field gives all zeros") {
  Setup s;
  const EvaluationBundle b = evaluate(s.op, s.params, s.model, s.op.make_field());
  CHECK(b.J_eps == 0.0);
  CHECK(b.kinetic == 0.0);
  CHECK(b.mass_term == 0.0);
  CHECK(b.F_int == 0.0);
  CHECK(b.pert_int == 0.0);
  CHECK(b.residual_dual == 0.0);
}

TEST_CASE("evaluate: constant-field closed form") {
  Setup s;
  // J(s e1) = (m-a)/2 s^2 vol - s^{2p} vol.
  {
    const EvaluationBundle b = evaluate(s.op, s.params, s.model, constant_field(s.op, 1.0));
    CHECK(b.J_eps == doctest::Approx(0.25 - 1.0).epsilon(1e-13));
    CHECK(b.kinetic == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(b.mass_term == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(b.F_int == doctest::Approx(1.0).epsilon(1e-13));
  }
  // The constant critical point s* = 0.04: J = 8e-5.
  {
    const EvaluationBundle b = evaluate(s.op, s.params, s.model, constant_field(s.op, 0.04));
    CHECK(b.J_eps == doctest::Approx(8e-5).epsilon(1e-10));
    CHECK(std::abs(b.J_eps - 8e-5) < 1e-12);
  }
}

TEST_CASE("bundle identity J = kinetic - mass - F - eps pert holds definitionally") {
  Setup s;
  s.params.eps = 0.37;
  const SpinorField f = random_field(s.op, 31);
  const EvaluationBundle b = evaluate(s.op, s.params, s.model, f);
  CHECK(std::abs(b.J_eps - (b.kinetic - b.mass_term - b.F_int - 0.37 * b.pert_int)) <
        1e-12 * (1.0 + std::abs(b.J_eps)));
  CHECK(b.J_eps == doctest::Approx(action_value(s.op, s.params, s.model, f)).epsilon(1e-13));
}

TEST_CASE("el_residual: zero field and the constant root") {
  Setup s;
  CHECK(s.op.norm(el_residual(s.op, s.params, s.model, s.op.make_field()), NormKind::L2) ==
        0.0);

  // r(s e1) = ((m-a)s - 2p s^{2p-1}) e1; zero exactly at s* = 0.04.
  const SpinorField r = el_residual(s.op, s.params, s.model, constant_field(s.op, 0.04));
  CHECK(s.op.norm(r, NormKind::L2) < 1e-14);

  const SpinorField r2 = el_residual(s.op, s.params, s.model, constant_field(s.op, 0.08));
  const double expect = 0.5 * 0.08 - 2.5 * std::pow(0.08, 1.5);
  CHECK(s.op.inner_l2_real(r2, constant_field(s.op, 1.0)) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("el_residual is the L2 gradient: FD of J along random directions") {
  Setup s;
  s.params.eps = 0.25;
  int checked = 0;
  for (std::uint64_t seed = 40; checked < 5 && seed < 200; ++seed) {
    const SpinorField psi = random_field(s.op, seed);
    if (min_cone_distance(s.op, psi) < 5e-3) continue;  // generic fields only
    ++checked;
    const SpinorField v = random_field(s.op, seed + 1000, 1.0);
    const double h = 1e-4;
    SpinorField plus = psi, minus = psi;
    plus.axpy(h, v);
    minus.axpy(-h, v);
    const double fd = (action_value(s.op, s.params, s.model, plus) -
                       action_value(s.op, s.params, s.model, minus)) /
                      (2 * h);
    const double an = directional_derivative(s.op, s.params, s.model, psi, v);
    CHECK(std::abs(fd - an) < 1e-5 * (1.0 + std::abs(an)));
  }
  CHECK(checked == 5);
}

TEST_CASE("grad_E adjoint identity and dual-norm match") {
  Setup s;
  s.params.eps = 0.1;
  for (std::uint64_t seed = 50; seed < 70; ++seed) {
    const SpinorField psi = random_field(s.op, seed);
    const SpinorField g = grad_E(s.op, s.params, s.model, psi);
    const SpinorField v = random_field(s.op, seed + 2000, 1.0);
    const double lhs = s.op.inner_E_real(g, v);
    const double rhs = directional_derivative(s.op, s.params, s.model, psi, v);
    CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(rhs)));

    const double ge = s.op.norm(g, NormKind::E);
    const double rd = s.op.norm_dual_E(el_residual(s.op, s.params, s.model, psi));
    CHECK(ge == doctest::Approx(rd).epsilon(1e-12));
  }
  CHECK(s.op.norm(grad_E(s.op, s.params, s.model, s.op.make_field()), NormKind::E) == 0.0);
}

TEST_CASE("ps_identity: gap is roundoff on random fields, zero at zero") {
  Setup s;
  s.params.eps = 0.6;
  for (std::uint64_t seed = 80; seed < 130; ++seed) {
    const SpinorField psi = random_field(s.op, seed);
    const PsIdentity id = ps_identity(s.op, s.params, s.model, psi);
    CHECK(std::abs(id.gap) < 1e-10 * (1.0 + std::abs(id.lhs)));
    // SolerPower: rhs >= eps (alpha2-2) pert_int since dF[psi] = 2pF >= 2F.
    const EvaluationBundle b = evaluate(s.op, s.params, s.model, psi);
    CHECK(id.rhs >= 0.6 * 0.5 * b.pert_int - 1e-12);
  }
  const PsIdentity zero = ps_identity(s.op, s.params, s.model, s.op.make_field());
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  CHECK(zero.gap == 0.0);
}

TEST_CASE("invariances: phase, lattice shift, eps-monotonicity") {
  Setup s;
  s.params.eps = 0.3;
  const SpinorField psi = random_field(s.op, 200);
  const double J = action_value(s.op, s.params, s.model, psi);

  // Phase invariance.
  SpinorField rot = psi;
  rot *= std::polar(1.0, 1.234);
  CHECK(std::abs(action_value(s.op, s.params, s.model, rot) - J) < 1e-12 * (1.0 + std::abs(J)));

  // Lattice-shift invariance.
  const SpinorField shifted = s.op.shift(psi, 2, 5, 1);
  CHECK(std::abs(action_value(s.op, s.params, s.model, shifted) - J) <
        1e-10 * (1.0 + std::abs(J)));

  // eps monotonicity: J_eps nonincreasing in eps.
  ProblemParams p0 = s.params, p1 = s.params;
  p0.eps = 0.0;
  p1.eps = 1.0;
  for (std::uint64_t seed = 300; seed < 400; ++seed) {
    const SpinorField f = random_field(s.op, seed);
    CHECK(action_value(s.op, p1, s.model, f) <= action_value(s.op, p0, s.model, f) + 1e-15);
  }
}

TEST_CASE("params validation") {
  Setup s;
  ProblemParams bad = s.params;
  bad.a = 1.5;
  CHECK_THROWS_AS(bad.validate(s.op), ConfigError);
  bad.a = -0.1;
  CHECK_THROWS_AS(bad.validate(s.op), ConfigError);
  ProblemParams good = s.params;
  CHECK_NOTHROW(good.validate(s.op));
}

TEST_CASE("external field: window validation and shifted constant root") {
  Setup s;
  // M = 0.1 constant: residual root moves to ((m-a-0.1)/2p)^{1/(2p-2)} = 0.0256.
  ProblemParams pm = s.params;
  pm.external = make_external_cos1(s.op, 0.1, 0.0);
  CHECK_NOTHROW(pm.validate(s.op));

  const double s_star = std::pow((1.0 - 0.5 - 0.1) / 2.5, 2.0);
  CHECK(s_star == doctest::Approx(0.0256).epsilon(1e-12));
  const SpinorField r = el_residual(s.op, pm, s.model, constant_field(s.op, s_star));
  CHECK(s.op.norm_dual_E(r) < 1e-14);

  // Oscillation too large: a + max M >= m rejected.
  ProblemParams bad = s.params;
  bad.external = make_external_cos1(s.op, 0.0, 0.3);  // max M = 0.6, a+M = 1.1 > m
  CHECK_THROWS_AS(bad.validate(s.op), ConfigError);

  // Gradient consistency with the cosine field present.
  ProblemParams pc = s.params;
  pc.external = make_external_cos1(s.op, 0.0, 0.1);
  pc.eps = 0.2;
  std::uint64_t pick = 500;
  while (min_cone_distance(s.op, random_field(s.op, pick)) < 5e-3) ++pick;
  const SpinorField psi = random_field(s.op, pick);
  const SpinorField v = random_field(s.op, pick + 1, 1.0);
  const double h = 1e-4;
  SpinorField plus = psi, minus = psi;
  plus.axpy(h, v);
  minus.axpy(-h, v);
  const double fd = (action_value(s.op, pc, s.model, plus) -
                     action_value(s.op, pc, s.model, minus)) /
                    (2 * h);
  const double an = directional_derivative(s.op, pc, s.model, psi, v);
  CHECK(std::abs(fd - an) < 1e-5 * (1.0 + std::abs(an)));

  // PS identity is unchanged by the external field (its terms cancel).
  const PsIdentity id = ps_identity(s.op, pc, s.model, psi);
  CHECK(std::abs(id.gap) < 1e-10 * (1.0 + std::abs(id.lhs)));
}
