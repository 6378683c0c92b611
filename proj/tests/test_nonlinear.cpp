#include <doctest.h>

#include <cmath>

#include "dirac/errors.hpp"
#include "dirac/nonlinear.hpp"
#include "dirac/rng.hpp"

using namespace dirac;

namespace {

Spinor4 random_spinor(const CounterRng& rng, std::uint64_t& ctr, double scale = 1.0) {
  Spinor4 psi;
  for (int c = 0; c < 4; ++c)
    psi[c] = scale * Complex(rng.gaussian(ctr++), rng.gaussian(ctr++));
  return psi;
}

// Central finite difference of F along the real coordinate directions of
// C^4 ~ R^8; the independent oracle for dF.
Spinor4 fd_gradient(const NonlinearityModel& model, const Spinor4& psi, double h) {
  Spinor4 grad;
  for (int c = 0; c < 4; ++c) {
    Spinor4 re_p = psi, re_m = psi, im_p = psi, im_m = psi;
    re_p[c] += h;
    re_m[c] -= h;
    im_p[c] += Complex(0, h);
    im_m[c] -= Complex(0, h);
    grad[c] = Complex((model.F_value(re_p) - model.F_value(re_m)) / (2 * h),
                      (model.F_value(im_p) - model.F_value(im_m)) / (2 * h));
  }
  return grad;
}

}  // namespace

TEST_CASE("F_value on canonical points") {
  const NonlinearityModel model = NonlinearityModel::soler_power(1.25, 0.0);
  CHECK(model.F_value(Spinor4(1, 0, 0, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(model.F_value(Spinor4(s, 0, s, 0)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(model.F_value(Spinor4::Zero()) == 0.0);
  CHECK(model.dF(Spinor4::Zero()).norm() == 0.0);
}

TEST_CASE("model constructor rejects out-of-window exponents") {
  CHECK_THROWS_AS(NonlinearityModel::soler_power(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(NonlinearityModel::soler_power(1.5, 0.0), ConfigError);
  CHECK_THROWS_AS(NonlinearityModel::soler_power(1.25, -0.5), ConfigError);
}

TEST_CASE("dF at e1 equals 2p e1 and matches finite differences") {
  const NonlinearityModel model = NonlinearityModel::soler_power(1.25, 0.0);
  const Spinor4 grad = model.dF(Spinor4(1, 0, 0, 0));
  CHECK(grad[0].real() == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(std::abs(grad[1]) + std::abs(grad[2]) + std::abs(grad[3]) < 1e-14);

  const Spinor4 fd = fd_gradient(model, Spinor4(1, 0, 0, 0), 1e-6);
  CHECK((grad - fd).norm() < 1e-8);
}

TEST_CASE("dF matches finite differences at random points away from the cone") {
  for (const double b : {0.0, 0.3}) {
    const NonlinearityModel model = NonlinearityModel::soler_power(1.25, b);
    const CounterRng rng(17, "nl-fd");
    std::uint64_t ctr = 0;
    int checked = 0;
    while (checked < 40) {
      const Spinor4 psi = random_spinor(rng, ctr);
      if (std::abs(dirac_bilinear(psi)) < 0.2) continue;  // FD noisy near the cone
      ++checked;
      const Spinor4 an = model.dF(psi);
      const Spinor4 fd = fd_gradient(model, psi, 1e-6);
      CHECK((an - fd).norm() < 1e-5 * (1.0 + an.norm()));
    }
  }
}

TEST_CASE("Euler identity <dF,psi> = 2p F on 100 random points") {
  const NonlinearityModel model = NonlinearityModel::soler_power(1.25, 0.4);
  const CounterRng rng(18, "nl-euler");
  std::uint64_t ctr = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Spinor4 psi = random_spinor(rng, ctr);
    const double pair = model.dF(psi).dot(psi).real();
    const double f = model.F_value(psi);
    CHECK(pair == doctest::Approx(2.5 * f).epsilon(1e-12));
  }
}

TEST_CASE("Hessian action matches directional finite differences of dF") {
  const NonlinearityModel model = NonlinearityModel::soler_power(1.25, 0.2);
  const CounterRng rng(19, "nl-hess");
  std::uint64_t ctr = 0;
  int checked = 0;
  while (checked < 50) {
    const Spinor4 psi = random_spinor(rng, ctr);
    if (std::abs(dirac_bilinear(psi)) < 0.3) continue;
    const Spinor4 v = random_spinor(rng, ctr);
    ++checked;
    const double h = 1e-6;
    Spinor4 plus = psi, minus = psi;
    plus += h * v;
    minus -= h * v;
    const Spinor4 fd = (model.dF(plus) - model.dF(minus)) / (2 * h);
    const Spinor4 an = model.hessF_apply(psi, v);
    CHECK((an - fd).norm() < 1e-5 * (1.0 + an.norm()));
  }
}

TEST_CASE("Hessian is a symmetric bilinear form at generic points") {
  const NonlinearityModel model = NonlinearityModel::soler_power(1.25, 0.0);
  const CounterRng rng(20, "nl-sym");
  std::uint64_t ctr = 0;
  int checked = 0;
  while (checked < 30) {
    const Spinor4 psi = random_spinor(rng, ctr);
    if (std::abs(dirac_bilinear(psi)) < 0.2) continue;
    ++checked;
    const Spinor4 v = random_spinor(rng, ctr);
    const Spinor4 w = random_spinor(rng, ctr);
    const double hvw = model.hessF_apply(psi, v).dot(w).real();
    const double hwv = model.hessF_apply(psi, w).dot(v).real();
    CHECK(std::abs(hvw - hwv) < 1e-10 * (1.0 + std::abs(hvw)));
  }
}

TEST_CASE("smoothed model is finite on the null cone and converges to the raw model") {
  const NonlinearityModel raw = NonlinearityModel::soler_power(1.25, 0.0);
  const NonlinearityModel sm = NonlinearityModel::smoothed(1.25, 0.0, 1e-3);

  const double s = 1.0 / std::sqrt(2.0);
  const Spinor4 cone(s, 0, s, 0);
  const Spinor4 v(0.3, -0.1, 0.2, 0.7);
  const Spinor4 h = sm.hessF_apply(cone, v);
  CHECK(std::isfinite(h.norm()));

  // hess_delta override: the raw model with an injected delta agrees with the
  // smoothed model's Hessian.
  const Spinor4 h2 = raw.hessF_apply(cone, v, 1e-3);
  CHECK((h - h2).norm() < 1e-13);

  // Away from the cone the smoothing perturbs by O(delta^p).
  const Spinor4 generic(1.0, 0.2, 0.1, -0.3);
  CHECK(std::abs(sm.F_value(generic) - raw.F_value(generic)) <
        2.0 * std::pow(1e-3, 1.25));
}

TEST_CASE("phase invariance of F") {
  const NonlinearityModel model = NonlinearityModel::soler_power(1.3, 0.7);
  const CounterRng rng(21, "nl-phase");
  std::uint64_t ctr = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Spinor4 psi = random_spinor(rng, ctr);
    const double theta = 6.283185307179586 * rng.uniform(ctr++);
    const Spinor4 rot = std::polar(1.0, theta) * psi;
    CHECK(model.F_value(rot) == doctest::Approx(model.F_value(psi)).epsilon(1e-12));
  }
}

TEST_CASE("F_integral of constant fields and quadrature convergence") {
  LatticeSpec lat{1, 1, 1, 2};
  const NonlinearityModel model = NonlinearityModel::soler_power(1.25, 0.0);

  // Constant (s,0,0,0): F = s^{2p} vol.
  {
    DiracOperator op(lat, GridDims::default_for(2), 1.0);
    SpinorField f = op.make_field();
    f.at(mode_index(lat, 0, 0, 0), 0) = 0.7;
    CHECK(F_integral(op, model, f) ==
          doctest::Approx(std::pow(0.7, 2.5)).epsilon(1e-13));
    CHECK(F_integral(op, model, op.make_field()) == 0.0);
  }

  // Refining the grid changes the integral of a smooth field below 1e-8.
  {
    DiracOperator op1(lat, GridDims{12, 12, 12}, 1.0);
    DiracOperator op2(lat, GridDims{24, 24, 24}, 1.0);
    const CounterRng rng(22, "nl-quad");
    SpinorField f1 = op1.make_field();
    std::uint64_t ctr = 0;
    for (std::size_t i = 0; i < f1.coeffs().size(); ++i) {
      const double decay = std::exp(-op1.modes()[i / 4].mu_abs);
      f1.coeffs()[i] = 0.5 * decay * Complex(rng.gaussian(ctr++), rng.gaussian(ctr++));
    }
    SpinorField f2 = op2.make_field();
    f2.coeffs() = f1.coeffs();  // same truncation, finer quadrature grid
    const double i1 = F_integral(op1, model, f1);
    const double i2 = F_integral(op2, model, f2);
    CHECK(std::abs(i1 - i2) < 1e-8 * (1.0 + std::abs(i2)));
  }
}

TEST_CASE("dF_field reports a small aliasing tail for smooth fields") {
  LatticeSpec lat{1, 1, 1, 2};
  DiracOperator op(lat, GridDims::default_for(2), 1.0);
  const NonlinearityModel model = NonlinearityModel::soler_power(1.25, 0.0);
  SpinorField f = op.make_field();
  f.at(mode_index(lat, 0, 0, 0), 0) = 0.5;
  f.at(mode_index(lat, 1, 0, 0), 1) = 0.05;

  double tail = -1.0;
  const SpinorField g = dF_field(op, model, f, &tail);
  CHECK(tail >= 0.0);
  CHECK(tail < 0.05);
  CHECK(op.norm(g, NormKind::L2) > 0.0);
}

TEST_CASE("verify_hypotheses: shipped defaults pass with exact-equality margins") {
  const NonlinearityModel model = NonlinearityModel::soler_power(1.25, 0.0);
  const HypothesisReport rep = verify_hypotheses(model, 500, 2.0, 99);
  CHECK(rep.all_pass);

  for (const auto& c : rep.checks) {
    if (c.name.find("(F3)") != std::string::npos)
      CHECK(std::abs(c.worst_margin) < 1e-12);  // exact homogeneity
    if (c.name.find("(F4)") != std::string::npos)
      CHECK(std::abs(c.worst_margin) < 1e-12);  // F = |q|^nu exactly
  }
}

TEST_CASE("verify_hypotheses flags a violated constant") {
  NonlinearityModel model = NonlinearityModel::soler_power(1.25, 0.0);
  HypothesisConstants h = model.constants();
  h.A1 = 1e-3;  // (F1) upper bound now fails
  model.set_constants(h);
  const HypothesisReport rep = verify_hypotheses(model, 500, 2.0, 99);
  CHECK_FALSE(rep.all_pass);
}

TEST_CASE("soler_g variant reproduces a quadratic Soler model") {
  // G(s) = s^2 for s > 0 (so F = q^2/2), zero on the negative axis.
  HypothesisConstants h;
  h.alpha = 3.0;
  h.alpha1 = 2.9;
  h.alpha2 = 2.9;
  h.nu = 2.0;
  h.A4 = 1.0;
  const NonlinearityModel g = NonlinearityModel::soler_g(
      [](double s) { return s > 0 ? s * s : 0.0; },
      [](double s) { return s > 0 ? 2 * s : 0.0; },
      [](double s) { return s > 0 ? 2.0 : 0.0; }, h);

  const Spinor4 psi(1.2, 0, 0.3, 0);
  const double q = dirac_bilinear(psi);
  CHECK(g.F_value(psi) == doctest::Approx(0.5 * q * q).epsilon(1e-14));
  const Spinor4 fd = fd_gradient(g, psi, 1e-6);
  CHECK((g.dF(psi) - fd).norm() < 1e-6);
}

TEST_CASE("zero model vanishes identically") {
  const NonlinearityModel z = NonlinearityModel::zero();
  const Spinor4 psi(1, 2, 3, 4);
  CHECK(z.F_value(psi) == 0.0);
  CHECK(z.dF(psi).norm() == 0.0);
  CHECK(z.hessF_apply(psi, psi).norm() == 0.0);
}
