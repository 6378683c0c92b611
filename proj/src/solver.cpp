#include "dirac/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dirac/errors.hpp"
#include "dirac/rng.hpp"

namespace dirac {

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                           43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101,
                           103, 107, 109, 113, 127, 131, 137, 139, 149, 151,
                           157, 163, 167, 173, 179, 181, 191, 193, 197, 199};
constexpr int kPrimeCount = static_cast<int>(sizeof(kPrimes) / sizeof(kPrimes[0]));

inline Spinor4 load_point(const std::vector<Complex>& grid, std::size_t p) {
  return Spinor4(grid[p], grid[p + 1], grid[p + 2], grid[p + 3]);
}

}  // namespace

// --- Linking constants -------------------------------------------------------

double choose_R_root(const NonlinearityModel& model, double vol, double m) {
  const HypothesisConstants& h = model.constants();
  if (!(h.nu > 1.0 && h.A3 > 0.0))
    throw SolverError("choose_R requires nu > 1 and A3 > 0");
  const double c = h.A3 * std::pow(vol, 1.0 - h.nu) * std::pow(2.0 * m, -h.nu);
  const double d = h.A4 * vol;
  const auto f = [&](double R) {
    return 0.5 * R * R - c * std::pow(R, 2.0 * h.nu) + d;
  };

  // f rises from d >= 0, peaks, then falls to -inf; the largest real root is
  // the unique sign change beyond the peak.
  const double R_peak = std::pow(1.0 / (2.0 * h.nu * c), 1.0 / (2.0 * h.nu - 2.0));
  if (!(f(R_peak) > 0.0))
    throw SolverError("choose_R: no positive root (degenerate constants)");
  double lo = R_peak, hi = R_peak;
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e100) throw SolverError("choose_R: root bracketing failed");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double choose_R(const NonlinearityModel& model, double vol, double m) {
  return 1.05 * choose_R_root(model, vol, m);
}

namespace {

SpinorField make_base_spinor(const DiracOperator& op) {
  // Constant upper spinor (1,0,0,0), normalized to ||e||_E = 1:
  // ||c e1||_E^2 = m c^2 vol.
  SpinorField e = op.make_field();
  const int zero = mode_index(op.lattice(), 0, 0, 0);
  e.at(zero, 0) = 1.0 / std::sqrt(op.mass() * op.lattice().vol());
  return e;
}

struct NegBasis {
  std::vector<SpinorField> fields;
  std::vector<double> lambdas;  // negative eigenvalues, |lambda| ascending
};

NegBasis negative_basis(const DiracOperator& op, double band) {
  struct Entry {
    double abs_lambda;
    int mode, col;
  };
  std::vector<Entry> entries;
  const double cutoff = band * op.mass();
  for (std::size_t i = 0; i < op.modes().size(); ++i) {
    const ModeEigenBasis& eb = op.basis(static_cast<int>(i));
    if (std::abs(eb.lambda_neg) <= cutoff) {
      entries.push_back({std::abs(eb.lambda_neg), static_cast<int>(i), 2});
      entries.push_back({std::abs(eb.lambda_neg), static_cast<int>(i), 3});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.abs_lambda != b.abs_lambda) return a.abs_lambda < b.abs_lambda;
    if (a.mode != b.mode) return a.mode < b.mode;
    return a.col < b.col;
  });

  NegBasis basis;
  const double vol = op.lattice().vol();
  for (const Entry& en : entries) {
    SpinorField f = op.make_field();
    const ModeEigenBasis& eb = op.basis(en.mode);
    const double scale = 1.0 / std::sqrt(vol * en.abs_lambda);  // unit E-norm
    for (int c = 0; c < 4; ++c) f.at(en.mode, c) = scale * eb.vectors(c, en.col);
    basis.fields.push_back(std::move(f));
    basis.lambdas.push_back(-en.abs_lambda);
  }
  return basis;
}

// Low-discrepancy point in the E-ball of radius `radius` of the sampled
// negative space, as complex coordinates against the E-orthonormal basis.
std::vector<Complex> ball_point(std::uint64_t index, int dim_c, double radius,
                                int prime_offset) {
  std::vector<Complex> xi(dim_c, Complex(0, 0));
  if (dim_c == 0) return xi;
  const int dim_r = 2 * dim_c;
  std::vector<double> z(dim_r);
  double norm_sq = 0.0;
  for (int d = 0; d < dim_r; ++d) {
    const int p = kPrimes[(prime_offset + d) % kPrimeCount];
    z[d] = inverse_normal_cdf(halton(index, p));
    norm_sq += z[d] * z[d];
  }
  const double norm = std::sqrt(std::max(norm_sq, 1e-300));
  const double u = halton(index, kPrimes[(prime_offset + dim_r) % kPrimeCount]);
  const double rad = radius * std::pow(u, 1.0 / dim_r);
  for (int j = 0; j < dim_c; ++j)
    xi[j] = Complex(z[2 * j] * rad / norm, z[2 * j + 1] * rad / norm);
  return xi;
}

// Fast evaluation of J_eps on cylinder points psi = sum xi_j b_j + lambda e:
// quadratic terms come from the E-orthonormality of the basis, F and the
// perturbation from a fused pointwise pass over precomputed basis grids.
class CylinderEvaluator {
 public:
  CylinderEvaluator(const DiracOperator& op, const LinkingGeometry& geo,
                    const ProblemParams& params, const NonlinearityModel& model)
      : op_(op), geo_(geo), params_(params), model_(model) {
    e_grid_ = op.to_grid(geo.e);
    for (const SpinorField& b : geo.neg_basis) basis_grids_.push_back(op.to_grid(b));
  }

  double eval(const std::vector<Complex>& xi, double lambda, double eps) const {
    double xi_sq = 0.0, l2_neg = 0.0;
    for (int j = 0; j < geo_.neg_dim(); ++j) {
      xi_sq += std::norm(xi[j]);
      l2_neg += std::norm(xi[j]) / std::abs(geo_.neg_lambda[j]);
    }
    const double kinetic = 0.5 * (lambda * lambda - xi_sq);
    const double l2_sq = lambda * lambda / op_.mass() + l2_neg;

    const double alpha2 = model_.constants().alpha2;
    const bool ext = params_.external.present();
    double F = 0.0, pert = 0.0, extmass = 0.0;
    const std::size_t npts = e_grid_.size() / 4;
    for (std::size_t p = 0; p < npts; ++p) {
      Spinor4 psi = lambda * load_point(e_grid_, 4 * p);
      for (int j = 0; j < geo_.neg_dim(); ++j)
        psi += xi[j] * load_point(basis_grids_[j], 4 * p);
      const double mag2 = psi.squaredNorm();
      F += model_.F_value(psi);
      pert += std::pow(mag2, 0.5 * alpha2);
      if (ext) extmass += params_.external.values[p] * mag2;
    }
    const double w = op_.quad_weight();
    return kinetic - 0.5 * params_.a * l2_sq - 0.5 * w * extmass - w * F -
           eps * w * pert;
  }

  // Fast path for pure e-line points (xi = 0): e is a constant spinor, so the
  // integrands are constant and no grid pass is needed.
  double eval_eline(double lambda, double eps) const {
    const Spinor4 psi = lambda * load_point(e_grid_, 0);
    const double mag2 = psi.squaredNorm();
    double extmass = 0.0;
    if (params_.external.present()) {
      double msum = 0.0;
      for (const double v : params_.external.values) msum += v;
      extmass = op_.quad_weight() * msum * mag2;
    }
    const double vol = op_.lattice().vol();
    return 0.5 * lambda * lambda - 0.5 * params_.a * lambda * lambda / op_.mass() -
           0.5 * extmass - vol * model_.F_value(psi) -
           eps * vol * std::pow(mag2, 0.5 * model_.constants().alpha2);
  }

  SpinorField assemble(const std::vector<Complex>& xi, double lambda) const {
    SpinorField f = geo_.e;
    f *= lambda;
    for (int j = 0; j < geo_.neg_dim(); ++j) {
      SpinorField term = geo_.neg_basis[j];
      term *= xi[j];
      f += term;
    }
    return f;
  }

 private:
  const DiracOperator& op_;
  const LinkingGeometry& geo_;
  const ProblemParams& params_;
  const NonlinearityModel& model_;
  std::vector<Complex> e_grid_;
  std::vector<std::vector<Complex>> basis_grids_;
};

}  // namespace

SphereFloor choose_r(const DiracOperator& op, const ProblemParams& params,
                     const NonlinearityModel& model, double R, const SolverConfig& cfg) {
  const HypothesisConstants& h = model.constants();
  const CounterRng rng(cfg.seed, "embedding");

  // Sampled lower bound for S_q = sup ||psi||_Lq / ||psi||_E over H^{1/2,+},
  // inflated for safety. Draws are weighted by 1/|lambda| so the sample is
  // not dominated by high frequencies (the large ratios live near the
  // constant directions, which are also covered explicitly).
  double ratio1 = 0.0, ratio2 = 0.0;
  std::uint64_t ctr = 0;
  for (int s = 0; s < cfg.embed_samples; ++s) {
    SpinorField f = op.make_field();
    if (s == 0) {
      f = make_base_spinor(op);  // the constant positive direction itself
    } else {
      for (std::size_t i = 0; i < op.modes().size(); ++i) {
        const ModeEigenBasis& eb = op.basis(static_cast<int>(i));
        const double w = 1.0 / eb.lambda_pos;
        const Complex d0 = w * Complex(rng.gaussian(ctr++), rng.gaussian(ctr++));
        const Complex d1 = w * Complex(rng.gaussian(ctr++), rng.gaussian(ctr++));
        for (int c = 0; c < 4; ++c)
          f.at(static_cast<int>(i), c) = d0 * eb.vectors(c, 0) + d1 * eb.vectors(c, 1);
      }
    }
    const double en = op.norm(f, NormKind::E);
    if (en == 0.0) continue;
    f *= 1.0 / en;
    ratio1 = std::max(ratio1, op.norm_lq(f, h.alpha1));
    ratio2 = std::max(ratio2, op.norm_lq(f, h.alpha2));
  }

  SphereFloor out;
  out.S_alpha1 = cfg.embed_inflation * ratio1;
  out.S_alpha2 = cfg.embed_inflation * ratio2;

  // Floor profile at worst case eps = 1. The quadratic coefficient carries
  // the spectral-gap factor (1 - a_eff/m) that absorbs the frequency term.
  const double gap = 0.5 * (1.0 - params.a_eff_max(op) / op.mass());
  const double cF1 = h.A1 * std::pow(out.S_alpha1, h.alpha1);
  const double cF2 = h.A1 * std::pow(out.S_alpha2, h.alpha2);
  const double cP = std::pow(out.S_alpha2, h.alpha2);
  const auto phi = [&](double r) {
    return gap * r * r - cF1 * std::pow(r, h.alpha1) - (cF2 + cP) * std::pow(r, h.alpha2);
  };

  // Log-spaced grid: the maximizer scales like a power of the embedding
  // constants and can sit many decades below R.
  double best_phi = 0.0, best_r = 0.0;
  const double r_min = 1e-12 * R;
  const double step = std::pow(R / r_min, 1.0 / cfg.r_grid);
  for (double r = r_min; r < R; r *= step) {
    const double v = phi(r);
    if (v > best_phi) {
      best_phi = v;
      best_r = r;
    }
  }
  if (!(best_phi > 0.0 && best_r > 0.0 && best_r < R))
    throw SolverError(
        "choose_r: no positive sphere floor at this truncation (constants too weak)");

  // Golden-section polish around the best gridpoint.
  {
    const double gr = 0.6180339887498949;
    double a = best_r / step, b = std::min(R, best_r * step);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = phi(x1), f2 = phi(x2);
    for (int it = 0; it < 120; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = phi(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = phi(x1);
      }
    }
    const double r_pol = 0.5 * (a + b);
    if (phi(r_pol) > best_phi && r_pol < R) {
      best_phi = phi(r_pol);
      best_r = r_pol;
    }
  }
  out.r = best_r;
  out.C_star = best_phi;
  return out;
}

LinkingGeometry build_geometry(const DiracOperator& op, const ProblemParams& params,
                               const NonlinearityModel& model, const SolverConfig& cfg) {
  LinkingGeometry geo;
  geo.e = make_base_spinor(op);
  NegBasis nb = negative_basis(op, cfg.neg_band);
  geo.neg_basis = std::move(nb.fields);
  geo.neg_lambda = std::move(nb.lambdas);
  geo.R = choose_R(model, op.lattice().vol(), op.mass());
  const SphereFloor floor = choose_r(op, params, model, geo.R, cfg);
  geo.r = floor.r;
  geo.C_star = floor.C_star;
  return geo;
}

BoundaryAudit boundary_audit(const DiracOperator& op, const LinkingGeometry& geometry,
                             const ProblemParams& params, const NonlinearityModel& model,
                             int samples, std::uint64_t seed) {
  const CylinderEvaluator cyl(op, geometry, params, model);
  const int dim = geometry.neg_dim();
  const int per_face = std::max(1, samples / 3);
  const double R = geometry.R;
  (void)seed;

  BoundaryAudit audit;
  double neg_inf = -std::numeric_limits<double>::infinity();
  audit.face_neg_sphere = neg_inf;
  audit.face_lambda_0 = neg_inf;
  audit.face_lambda_R = neg_inf;

  for (int i = 0; i < per_face; ++i) {
    // Face ||psi^-||_E = R: scale a ball sample onto the sphere.
    if (dim > 0) {
      std::vector<Complex> xi = ball_point(i, dim, R, 0);
      double norm = 0.0;
      for (const Complex& c : xi) norm += std::norm(c);
      norm = std::sqrt(norm);
      if (norm > 0.0)
        for (Complex& c : xi) c *= R / norm;
      const double lambda = R * halton(i, kPrimes[(2 * dim + 1) % kPrimeCount]);
      audit.face_neg_sphere =
          std::max(audit.face_neg_sphere, cyl.eval(xi, lambda, params.eps));
    }
    // Faces lambda = 0 and lambda = R over the ball.
    const std::vector<Complex> xi = ball_point(i + 7919, dim, R, 3);
    audit.face_lambda_0 = std::max(audit.face_lambda_0, cyl.eval(xi, 0.0, params.eps));
    audit.face_lambda_R = std::max(audit.face_lambda_R, cyl.eval(xi, R, params.eps));
  }
  if (dim == 0) audit.face_neg_sphere = audit.face_lambda_0;

  audit.max_J = std::max({audit.face_neg_sphere, audit.face_lambda_0, audit.face_lambda_R});
  audit.pass = audit.max_J <= 1e-9;
  return audit;
}

// --- Level bracket ------------------------------------------------------------

LevelBracket level_bracket(const DiracOperator& op, const ProblemParams& params,
                           const NonlinearityModel& model, const LinkingGeometry& geometry) {
  LevelBracket bracket;
  bracket.c1 = geometry.C_star;

  ProblemParams p0 = params;
  p0.eps = 0.0;  // J_0 dominates every J_eps
  const CylinderEvaluator cyl(op, geometry, p0, model);
  const int dim = geometry.neg_dim();
  const double R = geometry.R;

  // The intersection point r e of cylinder and sphere is always included.
  double best = cyl.eval_eline(geometry.r, 0.0);
  std::vector<Complex> best_xi(dim, Complex(0, 0));
  double best_lambda = geometry.r;

  // Dense scan of the e-line (cheap closed form for the constant base spinor).
  const int eline_n = 20000;
  for (int i = 1; i <= eline_n; ++i) {
    const double lambda = R * static_cast<double>(i) / eline_n;
    const double J = cyl.eval_eline(lambda, 0.0);
    if (J > best) {
      best = J;
      best_lambda = lambda;
      std::fill(best_xi.begin(), best_xi.end(), Complex(0, 0));
    }
  }
  // Golden-section polish around the best e-line rung.
  {
    const double gr = 0.6180339887498949;
    double a = std::max(0.0, best_lambda - 2.0 * R / eline_n);
    double b = std::min(R, best_lambda + 2.0 * R / eline_n);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = cyl.eval_eline(x1, 0.0), f2 = cyl.eval_eline(x2, 0.0);
    for (int it = 0; it < 200; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = cyl.eval_eline(x2, 0.0);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = cyl.eval_eline(x1, 0.0);
      }
    }
    const double lam = 0.5 * (a + b);
    const double J = cyl.eval_eline(lam, 0.0);
    if (J > best) {
      best = J;
      best_lambda = lam;
      std::fill(best_xi.begin(), best_xi.end(), Complex(0, 0));
    }
  }

  // Low-discrepancy sweep of the full cylinder.
  SolverConfig defaults;
  for (int i = 0; i < defaults.c2_samples; ++i) {
    const std::vector<Complex> xi = ball_point(i, dim, R, 5);
    const double lambda = R * halton(i, kPrimes[(2 * dim + 5) % kPrimeCount]);
    const double J = cyl.eval(xi, lambda, 0.0);
    if (J > best) {
      best = J;
      best_xi = xi;
      best_lambda = lambda;
    }
  }

  // Local ascent polish from the best sample, in cylinder coordinates.
  {
    std::vector<Complex> xi = best_xi;
    double lambda = best_lambda;
    double J = best;
    double step = 0.05 * R;
    for (int it = 0; it < defaults.c2_polish_iters && step > 1e-14 * R; ++it) {
      const SpinorField f = cyl.assemble(xi, lambda);
      const SpinorField r = el_residual(op, p0, model, f);
      // Ascent direction in cylinder coordinates: dJ/dlambda = <r,e>_R,
      // dJ/dxi_j = <r,b_j> as a complex pair.
      double glam = op.inner_l2_real(r, geometry.e);
      std::vector<Complex> gxi(dim);
      double gnorm_sq = glam * glam;
      for (int j = 0; j < dim; ++j) {
        const Complex z = op.inner_l2(r, geometry.neg_basis[j]);
        gxi[j] = std::conj(z);
        gnorm_sq += std::norm(z);
      }
      if (gnorm_sq < 1e-30) break;
      const double gnorm = std::sqrt(gnorm_sq);

      std::vector<Complex> xi_t = xi;
      for (int j = 0; j < dim; ++j) xi_t[j] += (step / gnorm) * gxi[j];
      double lambda_t = std::clamp(lambda + (step / gnorm) * glam, 0.0, R);
      double xin = 0.0;
      for (const Complex& c : xi_t) xin += std::norm(c);
      xin = std::sqrt(xin);
      if (xin > R)
        for (Complex& c : xi_t) c *= R / xin;

      const double Jt = cyl.eval(xi_t, lambda_t, 0.0);
      if (Jt > J) {
        xi = xi_t;
        lambda = lambda_t;
        J = Jt;
        step *= 1.4;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, J);
  }

  bracket.c2 = best;
  if (!(bracket.c2 > bracket.c1))
    throw SolverError("level_bracket: degenerate bracket c2 <= c1");
  return bracket;
}

// --- Gradient-flow min-max ----------------------------------------------------

namespace {

enum class TrajState { Active, Stalled, FrozenLow, FrozenHigh };

struct Trajectory {
  SpinorField psi;
  double J = 0.0;
  double step = 1.0;
  double lambda0 = 0.0;
  int column = 0;
  double p_plus_E = 0.0;
  TrajState state = TrajState::Active;

  bool frozen() const { return state == TrajState::FrozenLow || state == TrajState::FrozenHigh; }
};

}  // namespace

FlowResult flow_minmax(const DiracOperator& op, const LinkingGeometry& geometry,
                       const ProblemParams& params, const NonlinearityModel& model,
                       const SolverConfig& cfg, const FlowOptions& opts) {
  const double effective_floor =
      opts.enforce_bracket ? std::max(opts.freeze_floor, 0.5 * opts.c1) : opts.freeze_floor;

  // Deterministic cloud: geometric lambda ladder x low-discrepancy ball, with
  // the pure e-line column first.
  const int nl = std::max(2, cfg.cloud_lambda);
  const int nb = std::max(1, cfg.cloud_ball);
  std::vector<double> ladder(nl);
  const double gamma = std::pow(cfg.lambda_floor_factor, 1.0 / (nl - 1));
  for (int i = 0; i < nl; ++i) ladder[i] = geometry.R * std::pow(gamma, nl - 1 - i);

  const int dim = geometry.neg_dim();
  std::vector<std::vector<Complex>> ball(nb);
  ball[0].assign(dim, Complex(0, 0));
  for (int j = 1; j < nb; ++j) ball[j] = ball_point(j - 1, dim, geometry.R, 9);

  const CylinderEvaluator cyl(op, geometry, params, model);

  std::vector<Trajectory> cloud;
  cloud.reserve(static_cast<std::size_t>(nl) * nb);
  for (int j = 0; j < nb; ++j)
    for (int i = 0; i < nl; ++i) {
      Trajectory t;
      t.lambda0 = ladder[i];
      t.column = j;
      t.step = cfg.armijo_step0;
      t.J = (j == 0) ? cyl.eval_eline(t.lambda0, params.eps)
                     : cyl.eval(ball[j], t.lambda0, params.eps);
      if (t.J > effective_floor) {
        t.psi = cyl.assemble(ball[j], t.lambda0);
        t.p_plus_E = op.norm(op.project(t.psi, +1), NormKind::E);
        t.state = TrajState::Active;
      } else {
        t.state = TrajState::FrozenHigh;  // born below the floor: never matters
      }
      cloud.push_back(std::move(t));
    }

  FlowResult result;
  result.candidate = op.make_field();
  // Candidate quality is the gradient RELATIVE to the field size: it tends
  // to zero only along approaches to a nontrivial critical point, while a
  // drain toward the origin keeps ||g||_E / ||psi||_E at the linear rate.
  double best_rel = std::numeric_limits<double>::infinity();
  double best_grad = std::numeric_limits<double>::infinity();
  double best_J = -std::numeric_limits<double>::infinity();
  bool have_candidate = false;

  double S_prev = std::numeric_limits<double>::infinity();
  int sweeps_since_insert = 0;
  int stall_count = 0;
  bool witness_ever = false;

  const auto cloud_sup = [&]() {
    double s = -std::numeric_limits<double>::infinity();
    for (const Trajectory& t : cloud) s = std::max(s, t.J);
    return s;
  };

  int sweep = 0;
  for (; sweep < cfg.flow_max_sweeps; ++sweep) {
    int active = 0;

    for (Trajectory& t : cloud) {
      if (t.state != TrajState::Active) continue;
      ++active;

      const SpinorField g = grad_E(op, params, model, t.psi);
      const double gn = op.norm(g, NormKind::E);
      const double psi_E = op.norm(t.psi, NormKind::E);
      const double rel = gn / std::max(psi_E, 1e-300);

      if (t.J > effective_floor && rel < best_rel) {
        best_rel = rel;
        best_grad = gn;
        best_J = t.J;
        result.candidate = t.psi;
        have_candidate = true;
      }
      if (gn < 1e-14 * std::max(1.0, psi_E)) {
        t.state = TrajState::Stalled;  // sitting on a critical point
        continue;
      }

      // Armijo backtracking along -grad_E; the directional derivative along
      // -g is exactly -||g||_E^2.
      double step = t.step;
      bool accepted = false;
      bool first_try = true;
      while (step > 1e-14) {
        SpinorField trial = t.psi;
        trial.axpy(-step, g);
        const double Jt = action_value(op, params, model, trial);
        if (Jt <= t.J - cfg.armijo_c * step * gn * gn) {
          t.psi = std::move(trial);
          t.J = Jt;
          t.step = first_try ? std::min(step * 1.5, 4.0) : step;
          accepted = true;
          break;
        }
        step *= 0.5;
        first_try = false;
      }
      if (!accepted) {
        t.state = TrajState::Stalled;  // near-critical: keeps its level in S
        continue;
      }

      t.p_plus_E = op.norm(op.project(t.psi, +1), NormKind::E);
      if (t.J <= effective_floor) {
        // Fate decides the refinement bracket: a collapsed positive part
        // means the trajectory drained toward the origin, anything else
        // escaped along the negative cone.
        t.state = (t.p_plus_E < 0.1 * t.lambda0) ? TrajState::FrozenLow
                                                 : TrajState::FrozenHigh;
        t.psi = SpinorField();  // release
      }
    }

    const double S = cloud_sup();
    result.final_S = S;
    ++sweeps_since_insert;

    bool witness = false;
    for (const Trajectory& t : cloud)
      if (!t.frozen() && t.J > effective_floor && t.p_plus_E >= geometry.r) witness = true;
    witness_ever = witness_ever || witness;

    const bool stalled_sweep =
        (S_prev - S < cfg.flow_tol_level) && sweeps_since_insert >= 3;
    S_prev = S;
    stall_count = stalled_sweep ? stall_count + 1 : 0;

    if (stall_count < 2 && active > 0) continue;

    // The sup has stalled (or everything froze). Good enough to hand to
    // Newton? Otherwise refine the ladder around the live separatrix.
    const double goal =
        have_candidate
            ? cfg.flow_grad_goal_rel *
                  std::max(op.norm(result.candidate, NormKind::E), 1e-12)
            : 0.0;
    if (have_candidate && best_grad <= goal) break;
    if (result.refinements >= cfg.flow_max_refinements) break;

    // Locate a fate bracket: adjacent lambda0 values in one column whose
    // trajectories drained to opposite sides.
    int best_col = -1;
    double lo = 0.0, hi = 0.0;
    for (int j = 0; j < nb && best_col < 0; ++j) {
      std::vector<const Trajectory*> col;
      for (const Trajectory& t : cloud)
        if (t.column == j) col.push_back(&t);
      std::sort(col.begin(), col.end(), [](const Trajectory* a, const Trajectory* b) {
        return a->lambda0 < b->lambda0;
      });
      for (std::size_t i = 0; i + 1 < col.size(); ++i) {
        const bool low_i = col[i]->state == TrajState::FrozenLow;
        const bool high_n = col[i + 1]->state == TrajState::FrozenHigh;
        if (low_i && high_n &&
            col[i + 1]->lambda0 - col[i]->lambda0 > 1e-12 * geometry.R) {
          best_col = j;
          lo = col[i]->lambda0;
          hi = col[i + 1]->lambda0;
          break;
        }
      }
    }
    if (best_col < 0) break;  // nothing left to subdivide

    for (int s = 1; s <= cfg.refine_subdivisions; ++s) {
      Trajectory t;
      t.lambda0 = lo + (hi - lo) * s / (cfg.refine_subdivisions + 1);
      t.column = best_col;
      t.step = cfg.armijo_step0;
      t.J = (best_col == 0) ? cyl.eval_eline(t.lambda0, params.eps)
                            : cyl.eval(ball[best_col], t.lambda0, params.eps);
      if (t.J > effective_floor) {
        t.psi = cyl.assemble(ball[best_col], t.lambda0);
        t.p_plus_E = op.norm(op.project(t.psi, +1), NormKind::E);
      } else {
        t.state = TrajState::FrozenHigh;
      }
      cloud.push_back(std::move(t));
    }
    ++result.refinements;
    sweeps_since_insert = 0;
    stall_count = 0;
  }

  result.sweeps = sweep;

  // Prefer the near-critical hover snapshot; if the gradient goal was never
  // reached (e.g. everything drained to a fixed point), fall back to the
  // argmax over the trajectories that still carry a state.
  const double goal =
      have_candidate
          ? cfg.flow_grad_goal_rel * std::max(op.norm(result.candidate, NormKind::E), 1e-12)
          : 0.0;
  bool use_best = have_candidate && best_grad <= goal;
  if (!use_best) {
    const Trajectory* argmax = nullptr;
    for (const Trajectory& t : cloud)
      if ((t.state == TrajState::Active || t.state == TrajState::Stalled) &&
          (!argmax || t.J > argmax->J))
        argmax = &t;
    if (argmax) {
      result.candidate = argmax->psi;
      result.lambda_est = argmax->J;
      result.best_grad_E =
          op.norm(grad_E(op, params, model, result.candidate), NormKind::E);
    } else {
      use_best = have_candidate;  // everything froze: keep the best hover
    }
  }
  if (use_best) {
    result.lambda_est = best_J;
    result.best_grad_E = best_grad;
  }

  if (opts.enforce_bracket) {
    if ((!have_candidate && result.lambda_est == 0.0) || result.lambda_est < opts.c1)
      throw SolverError(
          "flow_minmax: level collapse below c1 -- the cloud is too coarse, "
          "increase solver.cloud_lambda/solver.cloud_ball");
    if (!witness_ever)
      throw SolverError("flow_minmax: no sphere crossing retained by the cloud");
    result.within_bracket = result.lambda_est > opts.c1 - cfg.flow_tol_level &&
                            result.lambda_est < opts.c2 + cfg.flow_tol_level;
  }
  return result;
}

// --- Newton-Krylov ------------------------------------------------------------

namespace {

// Jacobian of the Euler-Lagrange residual at psi (real-linear, symmetric in
// the real L2 pairing): v -> D v - a v - M v - HessF_eps(psi) v.
class ElJacobian {
 public:
  ElJacobian(const DiracOperator& op, const ProblemParams& params,
             const NonlinearityModel& model, const SpinorField& psi, double hess_delta)
      : op_(op), params_(params), model_(model), hess_delta_(hess_delta),
        psi_grid_(op.to_grid(psi)) {}

  SpinorField apply(const SpinorField& v) const {
    std::vector<Complex> vg = op_.to_grid(v);
    const double alpha2 = model_.constants().alpha2;
    const bool ext = params_.external.present();
    const double eps = params_.eps;
    std::size_t point = 0;
    for (std::size_t p = 0; p < vg.size(); p += 4, ++point) {
      const Spinor4 psi_x = load_point(psi_grid_, p);
      const Spinor4 v_x = load_point(vg, p);
      Spinor4 h = model_.hessF_apply(psi_x, v_x, hess_delta_);
      if (eps > 0.0) {
        const double mag2 = psi_x.squaredNorm();
        if (mag2 > 0.0) {
          const double f1 = std::pow(mag2, 0.5 * alpha2 - 1.0);
          const double f2 =
              (alpha2 - 2.0) * std::pow(mag2, 0.5 * alpha2 - 2.0) * psi_x.dot(v_x).real();
          h += (eps * alpha2) * (f1 * v_x + f2 * psi_x);
        }
      }
      if (ext) h += params_.external.values[point] * v_x;
      for (int c = 0; c < 4; ++c) vg[p + c] = h[c];
    }
    SpinorField hv = op_.to_modes(vg);
    SpinorField out = op_.apply_D(v);
    out.axpy(-params_.a, v);
    out -= hv;
    return out;
  }

 private:
  const DiracOperator& op_;
  const ProblemParams& params_;
  const NonlinearityModel& model_;
  double hess_delta_;
  std::vector<Complex> psi_grid_;
};

// Right-preconditioned GMRES over the real inner product; M^{-1} is the
// spectral resolvent (D - a)^{-1}, diagonal in the per-mode eigenbases.
SpinorField gmres_solve(const DiracOperator& op, const ElJacobian& A,
                        const SpinorField& b, double a_shift, double rel_tol,
                        int restart, int max_iter) {
  const auto precon = [&](const SpinorField& f) { return op.apply_resolvent(f, a_shift); };
  const auto norm_of = [&](const SpinorField& f) {
    return std::sqrt(std::max(0.0, op.inner_l2_real(f, f)));
  };

  SpinorField x = op.make_field();
  const double beta0 = norm_of(b);
  if (beta0 == 0.0) return x;

  int iters_done = 0;
  while (iters_done < max_iter) {
    SpinorField r = b;
    if (iters_done > 0) {
      r -= A.apply(x);
    }
    const double beta = norm_of(r);
    if (beta <= rel_tol * beta0) break;

    const int m = std::min(restart, max_iter - iters_done);
    std::vector<SpinorField> V;
    V.reserve(m + 1);
    SpinorField v0 = r;
    v0 *= 1.0 / beta;
    V.push_back(std::move(v0));

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    g[0] = beta;
    std::vector<double> cs(m, 0.0), sn(m, 0.0);

    int j = 0;
    for (; j < m; ++j) {
      SpinorField w = A.apply(precon(V[j]));
      for (int i = 0; i <= j; ++i) {
        const double hij = op.inner_l2_real(V[i], w);
        H(i, j) = hij;
        w.axpy(-hij, V[i]);
      }
      const double hnext = norm_of(w);
      H(j + 1, j) = hnext;
      if (hnext > 1e-300) {
        w *= 1.0 / hnext;
        V.push_back(std::move(w));
      }

      // Givens update of column j.
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      if (denom > 0.0) {
        cs[j] = H(j, j) / denom;
        sn[j] = H(j + 1, j) / denom;
        H(j, j) = denom;
        H(j + 1, j) = 0.0;
        const double t = cs[j] * g[j];
        g[j + 1] = -sn[j] * g[j];
        g[j] = t;
      }
      ++iters_done;
      if (std::abs(g[j + 1]) <= rel_tol * beta0 || hnext <= 1e-300) {
        ++j;
        break;
      }
    }

    // Back substitution and solution update x += M^{-1} (V y).
    Eigen::VectorXd y = Eigen::VectorXd::Zero(j);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H(i, k) * y[k];
      y[i] = H(i, i) != 0.0 ? s / H(i, i) : 0.0;
    }
    SpinorField u = op.make_field();
    for (int i = 0; i < j; ++i) u.axpy(y[i], V[i]);
    x += precon(u);

    if (j < restart) break;  // converged or breakdown inside the cycle
  }
  return x;
}

}  // namespace

ContinuationRecord newton_refine(const DiracOperator& op, const SpinorField& start,
                                 const ProblemParams& params, const NonlinearityModel& model,
                                 const SolverConfig& cfg, double tol) {
  params.validate(op);
  SpinorField psi = start;
  SpinorField r = el_residual(op, params, model, psi);
  double rd = op.norm_dual_E(r);

  int iter = 0;
  while (rd > tol) {
    if (iter >= cfg.newton_max_iter)
      throw SolverError("newton_refine: no convergence in " +
                        std::to_string(cfg.newton_max_iter) +
                        " iterations (residual " + std::to_string(rd) + ")");

    const ElJacobian jac(op, params, model, psi, cfg.hess_delta);
    const double forcing = std::max(1e-10, std::min(1e-6, 0.1 * rd));
    const SpinorField delta =
        gmres_solve(op, jac, r, params.a, forcing, cfg.gmres_restart, cfg.gmres_max_iter);

    double t = 1.0;
    bool accepted = false;
    while (t > 1e-12) {
      SpinorField trial = psi;
      trial.axpy(-t, delta);
      const SpinorField rt = el_residual(op, params, model, trial);
      const double rdt = op.norm_dual_E(rt);
      if (rdt < (1.0 - 1e-4 * t) * rd) {
        psi = std::move(trial);
        r = rt;
        rd = rdt;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw SolverError(
          "newton_refine: line-search breakdown (null-cone linearization? try a "
          "larger model.delta)");
    ++iter;

    if (op.norm(psi, NormKind::L2) < 0.1 * cfg.trivial_floor && rd > tol)
      throw SolverError("newton_refine: collapsing to the trivial solution");
  }

  if (op.norm(psi, NormKind::L2) < cfg.trivial_floor)
    throw SolverError("newton_refine: converged to the trivial solution");

  ContinuationRecord rec;
  rec.eps = params.eps;
  rec.newton_iters = iter;
  const EvaluationBundle bundle = evaluate(op, params, model, psi);
  rec.level = bundle.J_eps;
  rec.residual_dual = bundle.residual_dual;
  rec.bounds.F_int = bundle.F_int;
  rec.bounds.pert_int = bundle.pert_int;
  rec.bounds.l2 = op.norm(psi, NormKind::L2);
  rec.bounds.l3 = op.norm_lq(psi, 3.0);
  rec.bounds.h1 = op.norm(psi, NormKind::H1);
  // int psibar psi, exact in mode space (gamma0 is diagonal per component).
  double qbar = 0.0;
  for (std::size_t i = 0; i < op.modes().size(); ++i)
    qbar += std::norm(psi.at(static_cast<int>(i), 0)) + std::norm(psi.at(static_cast<int>(i), 1)) -
            std::norm(psi.at(static_cast<int>(i), 2)) - std::norm(psi.at(static_cast<int>(i), 3));
  rec.bounds.qbar = op.lattice().vol() * qbar;
  rec.field = std::move(psi);
  return rec;
}

std::vector<double> Schedule::ladder() const {
  if (steps < 2) throw ConfigError("schedule requires at least 2 steps");
  if (!(eps0 > 0.0 && eps0 <= 1.0)) throw ConfigError("schedule requires eps0 in (0,1]");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("schedule requires ratio in (0,1)");
  std::vector<double> eps(steps);
  for (int k = 0; k < steps - 1; ++k) eps[k] = eps0 * std::pow(ratio, k);
  eps[steps - 1] = 0.0;
  return eps;
}

ContinuationResult run_continuation(const DiracOperator& op, ProblemParams params,
                                    const NonlinearityModel& model, const Schedule& schedule,
                                    const SolverConfig& cfg) {
  params.validate(op);
  const std::vector<double> ladder = schedule.ladder();

  ContinuationResult result;
  const LinkingGeometry geometry = build_geometry(op, params, model, cfg);
  result.bracket = level_bracket(op, params, model, geometry);

  params.eps = ladder[0];
  result.audit = boundary_audit(op, geometry, params, model, cfg.audit_samples, cfg.seed);
  if (!result.audit.pass)
    throw SolverError("boundary audit failed: max J on the cylinder boundary = " +
                      std::to_string(result.audit.max_J));

  FlowOptions opts;
  opts.enforce_bracket = true;
  opts.c1 = result.bracket.c1;
  opts.c2 = result.bracket.c2;
  result.flow = flow_minmax(op, geometry, params, model, cfg, opts);

  double last_good_eps = -1.0;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    params.eps = ladder[k];
    const double tol = (k + 1 == ladder.size()) ? cfg.final_tol : cfg.newton_tol;
    const SpinorField& start = (k == 0) ? result.flow.candidate : result.records.back().field;
    try {
      result.records.push_back(newton_refine(op, start, params, model, cfg, tol));
    } catch (const SolverError& err) {
      throw SolverError("continuation stage " + std::to_string(k) +
                        " (eps = " + std::to_string(ladder[k]) + ") diverged; last good eps = " +
                        (last_good_eps < 0 ? std::string("none") : std::to_string(last_good_eps)) +
                        ": " + err.what());
    }
    last_good_eps = ladder[k];
  }
  return result;
}

BoundReport bound_report(const DiracOperator& op, const ContinuationRecord& record,
                         const NonlinearityModel& model, const ProblemParams& params) {
  const HypothesisConstants& h = model.constants();
  const double slack = 1e-8;
  BoundReport rep;

  auto push = [&rep](std::string name, double lhs, double rhs, bool informative = false) {
    BoundCheck c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.informative = informative;
    c.pass = informative || lhs <= rhs;
    if (!c.pass) rep.all_pass = false;
    rep.checks.push_back(std::move(c));
  };

  const double level = record.level;
  const double f_bound = 2.0 * level / (h.alpha - 2.0) * (1.0 + slack);
  push("F_int <= 2 level/(alpha-2)", record.bounds.F_int, f_bound);
  push("eps * pert_int <= 2 level/(alpha-2)", record.eps * record.bounds.pert_int, f_bound);

  // dF_eps pairing: int dF(psi)[psi] + eps alpha2 int |psi|^alpha2.
  double pairing = 0.0;
  {
    const std::vector<Complex> grid = op.to_grid(record.field);
    for (std::size_t p = 0; p < grid.size(); p += 4) {
      const Spinor4 psi = load_point(grid, p);
      pairing += model.dF(psi).dot(psi).real();
    }
    pairing = op.quad_weight() * pairing +
              params.eps * h.alpha2 * record.bounds.pert_int;
  }
  push("int dF_eps[psi] <= 2 level alpha/(alpha-2)", pairing,
       2.0 * level * h.alpha / (h.alpha - 2.0) * (1.0 + slack));

  const double vol = op.lattice().vol();
  const double qbar_rhs = (params.m - params.a) * std::pow(vol, 1.0 - 1.0 / h.nu) *
                          std::pow((record.bounds.F_int + h.A4 * vol) / h.A3, 1.0 / h.nu) *
                          (1.0 + slack);
  push("(m-a) qbar <= (m-a) vol^{1-1/nu} ((F_int+A4 vol)/A3)^{1/nu}",
       (params.m - params.a) * record.bounds.qbar, qbar_rhs);

  push("L3 norm (observed)", record.bounds.l3, 0.0, /*informative=*/true);
  push("H1 norm (observed)", record.bounds.h1, 0.0, /*informative=*/true);
  return rep;
}

}  // namespace dirac
