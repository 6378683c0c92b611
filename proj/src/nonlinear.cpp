#include "dirac/nonlinear.hpp"

#include <cmath>

#include "dirac/errors.hpp"
#include "dirac/rng.hpp"

namespace dirac {

namespace {

const Complex I(0.0, 1.0);

// gamma0*gamma5 applied pointwise: (psi1..psi4) -> (-i psi3, -i psi4, i psi1, i psi2).
inline Spinor4 g0g5(const Spinor4& psi) {
  return Spinor4(-I * psi[2], -I * psi[3], I * psi[0], I * psi[1]);
}

inline double real_pair(const Spinor4& u, const Spinor4& v) { return u.dot(v).real(); }

// Scalar profile W(s) = (s^2 + d^2)^{p/2} - d^p and derivatives; d = 0 gives
// |s|^p with W'(0) = W''(0) := 0 (continuous extension, p > 1).
struct Profile {
  double p, d;
  double value(double s) const {
    if (d == 0.0) return std::pow(std::abs(s), p);
    return std::pow(s * s + d * d, 0.5 * p) - std::pow(d, p);
  }
  double deriv(double s) const {
    if (d == 0.0) {
      const double a = std::abs(s);
      return a == 0.0 ? 0.0 : p * std::pow(a, p - 1.0) * (s > 0 ? 1.0 : -1.0);
    }
    return p * s * std::pow(s * s + d * d, 0.5 * p - 1.0);
  }
  double deriv2(double s) const {
    if (d == 0.0) {
      const double a = std::abs(s);
      return a == 0.0 ? 0.0 : p * (p - 1.0) * std::pow(a, p - 2.0);
    }
    const double s2d2 = s * s + d * d;
    return p * std::pow(s2d2, 0.5 * p - 2.0) * ((p - 1.0) * s * s + d * d);
  }
};

}  // namespace

void HypothesisConstants::validate() const {
  if (!(A1 > 0 && A2 > 0 && A3 > 0 && A4 >= 0 && A5 > 0))
    throw ConfigError("hypothesis constants A1,A2,A3,A5 must be positive, A4 >= 0");
  if (!(alpha > 2)) throw ConfigError("(F3) requires alpha > 2");
  if (!(beta > 3)) throw ConfigError("(F5) requires beta > 3");
  if (!(nu > 1)) throw ConfigError("(F4) requires nu > 1");
  if (!(2 < alpha1 && alpha1 <= alpha2 && alpha2 < 3))
    throw ConfigError("(F1) requires 2 < alpha1 <= alpha2 < 3");
}

NonlinearityModel NonlinearityModel::soler_power(double p, double b) {
  if (!(p > 1.0 && p < 1.5)) throw ConfigError("soler_power requires 1 < p < 3/2");
  if (!(b >= 0.0)) throw ConfigError("soler_power requires b >= 0");
  NonlinearityModel m;
  m.kind_ = ModelKind::SolerPower;
  m.p_ = p;
  m.b_ = b;
  m.delta_ = 0.0;
  HypothesisConstants hyp;
  hyp.alpha1 = hyp.alpha2 = hyp.alpha = 2.0 * p;  // exact homogeneity
  hyp.A1 = 1.0 + b;                               // |q|,|q5| <= |psi|^2
  hyp.A2 = 2.0 * p * (2.0 * p - 1.0) * (1.0 + b);
  hyp.A3 = 1.0;
  hyp.A4 = 0.0;
  hyp.nu = p;
  hyp.beta = std::min(4.0, p / (p - 1.0));  // (3, p/(p-1)] is admissible
  hyp.A5 = 2.0 * p * (1.0 + b + (b > 0.0 ? std::pow(b, 1.0 - 1.0 / hyp.beta) : 0.0));
  m.hyp_ = hyp;
  m.hyp_.validate();
  return m;
}

NonlinearityModel NonlinearityModel::smoothed(double p, double b, double delta) {
  if (!(delta >= 0.0)) throw ConfigError("smoothed requires delta >= 0");
  NonlinearityModel m = soler_power(p, b);
  m.kind_ = ModelKind::Smoothed;
  m.delta_ = delta;
  return m;
}

NonlinearityModel NonlinearityModel::soler_g(ScalarFn G, ScalarFn dG, ScalarFn ddG,
                                             HypothesisConstants constants) {
  constants.validate();
  NonlinearityModel m;
  m.kind_ = ModelKind::SolerG;
  m.G_ = std::move(G);
  m.dG_ = std::move(dG);
  m.ddG_ = std::move(ddG);
  m.hyp_ = constants;
  return m;
}

NonlinearityModel NonlinearityModel::zero() {
  NonlinearityModel m;
  m.kind_ = ModelKind::Zero;
  return m;
}

double NonlinearityModel::F_value(const Spinor4& psi) const {
  switch (kind_) {
    case ModelKind::Zero:
      return 0.0;
    case ModelKind::SolerG:
      return 0.5 * G_(dirac_bilinear(psi));
    case ModelKind::SolerPower:
    case ModelKind::Smoothed: {
      const Profile w{p_, delta_};
      double f = w.value(dirac_bilinear(psi));
      if (b_ > 0.0) f += b_ * w.value(gamma5_bilinear(psi).real());
      return f;
    }
  }
  return 0.0;
}

Spinor4 NonlinearityModel::dF(const Spinor4& psi) const {
  switch (kind_) {
    case ModelKind::Zero:
      return Spinor4::Zero();
    case ModelKind::SolerG: {
      const double q = dirac_bilinear(psi);
      return dG_(q) * (gamma(0) * psi);
    }
    case ModelKind::SolerPower:
    case ModelKind::Smoothed: {
      const Profile w{p_, delta_};
      Spinor4 grad = (2.0 * w.deriv(dirac_bilinear(psi))) * Spinor4(gamma(0) * psi);
      if (b_ > 0.0)
        grad += (2.0 * b_ * w.deriv(gamma5_bilinear(psi).real())) * g0g5(psi);
      return grad;
    }
  }
  return Spinor4::Zero();
}

Spinor4 NonlinearityModel::hessF_apply(const Spinor4& psi, const Spinor4& v,
                                       double hess_delta) const {
  switch (kind_) {
    case ModelKind::Zero:
      return Spinor4::Zero();
    case ModelKind::SolerG: {
      const double q = dirac_bilinear(psi);
      const Spinor4 g0psi = gamma(0) * psi;
      return dG_(q) * (gamma(0) * v) + (2.0 * ddG_(q) * real_pair(g0psi, v)) * g0psi;
    }
    case ModelKind::SolerPower:
    case ModelKind::Smoothed: {
      const Profile w{p_, hess_delta >= 0.0 ? hess_delta : delta_};
      const double q = dirac_bilinear(psi);
      const Spinor4 g0psi = gamma(0) * psi;
      Spinor4 out = (2.0 * w.deriv(q)) * Spinor4(gamma(0) * v) +
                    (4.0 * w.deriv2(q) * real_pair(g0psi, v)) * g0psi;
      if (b_ > 0.0) {
        const double g = gamma5_bilinear(psi).real();
        const Spinor4 gpsi = g0g5(psi);
        out += (2.0 * b_ * w.deriv(g)) * g0g5(v) +
               (4.0 * b_ * w.deriv2(g) * real_pair(gpsi, v)) * gpsi;
      }
      return out;
    }
  }
  return Spinor4::Zero();
}

double F_integral(const DiracOperator& op, const NonlinearityModel& model,
                  const SpinorField& field) {
  const std::vector<Complex> grid = op.to_grid(field);
  double acc = 0.0;
  for (std::size_t p = 0; p < grid.size(); p += 4) {
    const Spinor4 psi(grid[p], grid[p + 1], grid[p + 2], grid[p + 3]);
    acc += model.F_value(psi);
  }
  return op.quad_weight() * acc;
}

SpinorField dF_field(const DiracOperator& op, const NonlinearityModel& model,
                     const SpinorField& field, double* tail_fraction) {
  std::vector<Complex> grid = op.to_grid(field);
  double total_sq = 0.0;
  for (std::size_t p = 0; p < grid.size(); p += 4) {
    Spinor4 psi(grid[p], grid[p + 1], grid[p + 2], grid[p + 3]);
    const Spinor4 g = model.dF(psi);
    for (int c = 0; c < 4; ++c) {
      grid[p + c] = g[c];
      total_sq += std::norm(g[c]);
    }
  }
  SpinorField out = op.to_modes(grid);
  if (tail_fraction) {
    // Discrete Parseval: grid energy vs the part captured below truncation.
    double kept_sq = 0.0;
    for (const Complex& c : out.coeffs()) kept_sq += std::norm(c);
    const double total = op.quad_weight() * total_sq;
    const double kept = op.lattice().vol() * kept_sq;
    *tail_fraction = total > 0.0 ? std::max(0.0, 1.0 - kept / total) : 0.0;
  }
  return out;
}

HypothesisReport verify_hypotheses(const NonlinearityModel& model, int sample_count,
                                   double radius, std::uint64_t seed) {
  if (sample_count < 1) throw ConfigError("verify_hypotheses requires sample_count >= 1");
  const HypothesisConstants& h = model.constants();
  const CounterRng rng(seed, "hypotheses");

  double m_f1_low = 1e300, m_f1_high = 1e300, m_f2 = 1e300, m_f3 = 1e300;
  double m_f4 = 1e300, m_f5 = 1e300;

  std::uint64_t ctr = 0;
  for (int s = 0; s < sample_count; ++s) {
    Spinor4 psi;
    for (int c = 0; c < 4; ++c)
      psi[c] = Complex(rng.gaussian(ctr++), rng.gaussian(ctr++));
    const double mag = psi.norm();
    const double target = radius * rng.uniform(ctr++);
    if (mag > 0.0) psi *= target / mag;

    const double apsi = psi.norm();
    const double F = model.F_value(psi);
    const Spinor4 grad = model.dF(psi);
    const double q = dirac_bilinear(psi);

    auto rel = [](double margin, double scale) {
      return margin / std::max(1.0, std::abs(scale));
    };

    const double f1h = h.A1 * (std::pow(apsi, h.alpha1) + std::pow(apsi, h.alpha2));
    m_f1_low = std::min(m_f1_low, rel(F, F));
    m_f1_high = std::min(m_f1_high, rel(f1h - F, f1h));

    // (F2) curvature, informative: |F''| <= A2 |psi|^{alpha2-2} for |psi| large.
    if (apsi >= 0.5 * radius) {
      double hnorm = 0.0;
      for (int c = 0; c < 4; ++c) {
        Spinor4 e = Spinor4::Zero();
        e[c] = 1.0;
        hnorm = std::max(hnorm, model.hessF_apply(psi, e).norm());
        e[c] = I;
        hnorm = std::max(hnorm, model.hessF_apply(psi, e).norm());
      }
      const double bound = h.A2 * std::pow(apsi, h.alpha2 - 2.0);
      m_f2 = std::min(m_f2, rel(bound - hnorm, bound));
    }

    const double pair = grad.dot(psi).real();
    m_f3 = std::min(m_f3, rel(pair - h.alpha * F, pair));

    const double f4r = h.A3 * std::pow(std::abs(q), h.nu) - h.A4;
    m_f4 = std::min(m_f4, rel(F - f4r, F));

    const double f5r = h.A5 * (1.0 + std::pow(F, 1.0 / h.beta)) * apsi;
    m_f5 = std::min(m_f5, rel(f5r - grad.norm(), f5r));
  }

  const double zeroF = model.F_value(Spinor4::Zero());
  const double zerodF = model.dF(Spinor4::Zero()).norm();

  HypothesisReport rep;
  auto push = [&rep](std::string name, double margin, bool informative = false) {
    HypothesisCheck c;
    c.name = std::move(name);
    c.worst_margin = margin;
    c.pass = margin >= -1e-12;
    c.informative = informative;
    if (!c.pass && !informative) rep.all_pass = false;
    rep.checks.push_back(std::move(c));
  };

  push("(F1) F >= 0", m_f1_low);
  push("(F1) F <= A1(|psi|^a1 + |psi|^a2)", m_f1_high);
  push("(F2) F(0) = dF(0) = 0", -(zeroF + zerodF));
  push("(F2) |F''| <= A2 |psi|^{a2-2} for |psi| large", m_f2 == 1e300 ? 0.0 : m_f2,
       /*informative=*/true);
  push("(F3) alpha F <= dF[psi]", m_f3);
  push("(F4) F >= A3 |qbar|^nu - A4", m_f4);
  push("(F5) |dF| <= A5 (1 + F^{1/beta}) |psi|", m_f5);
  return rep;
}

}  // namespace dirac
