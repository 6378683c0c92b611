#include "dirac/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "dirac/errors.hpp"

namespace dirac {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
const Complex I(0.0, 1.0);
}  // namespace

void LatticeSpec::validate() const {
  if (!(l1 > 0.0 && l1 <= l2 && l2 <= l3))
    throw ConfigError("lattice requires 0 < l1 <= l2 <= l3");
  if (K < 0) throw ConfigError("lattice requires K >= 0");
}

std::vector<DualMode> enumerate_modes(const LatticeSpec& lattice) {
  lattice.validate();
  std::vector<DualMode> modes;
  modes.reserve(lattice.mode_count());
  const int K = lattice.K;
  for (int n1 = -K; n1 <= K; ++n1)
    for (int n2 = -K; n2 <= K; ++n2)
      for (int n3 = -K; n3 <= K; ++n3) {
        DualMode mode;
        mode.n = {n1, n2, n3};
        mode.zeta_star = {n1 / lattice.l1, n2 / lattice.l2, n3 / lattice.l3};
        mode.mu_abs = kTwoPi * std::sqrt(mode.zeta_star[0] * mode.zeta_star[0] +
                                         mode.zeta_star[1] * mode.zeta_star[1] +
                                         mode.zeta_star[2] * mode.zeta_star[2]);
        modes.push_back(mode);
      }
  return modes;
}

int mode_index(const LatticeSpec& lattice, int n1, int n2, int n3) {
  const int K = lattice.K;
  const int w = lattice.modes_per_axis();
  return ((n1 + K) * w + (n2 + K)) * w + (n3 + K);
}

Mat4 dirac_symbol(const DualMode& mode, double m) {
  Mat4 s = m * gamma(0);
  for (int k = 1; k <= 3; ++k)
    s += (kTwoPi * mode.zeta_star[k - 1]) * alpha_mat(k);
  return s;
}

namespace {

// Eigenvectors of the 2x2 intrinsic symbol 2 pi sigma.zeta* for eigenvalues
// +-mu. Closed form (mu+z, x+iy), (-x+iy, mu+z) with the z = -mu branch
// handled separately.
void intrinsic_eigenvectors(const DualMode& mode, Eigen::Vector2cd& plus,
                            Eigen::Vector2cd& minus) {
  const double x = kTwoPi * mode.zeta_star[0];
  const double y = kTwoPi * mode.zeta_star[1];
  const double z = kTwoPi * mode.zeta_star[2];
  const double mu = mode.mu_abs;
  if (mu + z > 1e-14 * (1.0 + mu)) {
    plus << Complex(mu + z, 0.0), Complex(x, y);
    minus << Complex(-x, y), Complex(mu + z, 0.0);
    plus.normalize();
    minus.normalize();
  } else {
    plus << 0.0, 1.0;
    minus << 1.0, 0.0;
  }
}

// First nonzero component made real positive; reproducible snapshots depend
// on this convention.
void fix_phase(Eigen::Ref<Eigen::Vector4cd> v) {
  for (int i = 0; i < 4; ++i) {
    const double a = std::abs(v[i]);
    if (a > 1e-14) {
      v *= std::conj(v[i]) / a;
      v[i] = Complex(a, 0.0);  // kill the residual imaginary roundoff
      return;
    }
  }
}

}  // namespace

ModeEigenBasis mode_eigenbasis(const DualMode& mode, double m) {
  if (!(m > 0.0)) throw ConfigError("mode_eigenbasis requires m > 0");

  ModeEigenBasis basis;
  basis.mode = mode;
  const double mu = mode.mu_abs;
  const double root = std::sqrt(mu * mu + m * m);
  basis.lambda_pos = root;
  basis.lambda_neg = -root;

  const Mat4 g0 = gamma(0);
  Mat4 vecs;

  if (mu == 0.0) {
    // Kernel of the geometric operator: constant spinors. t = +-1, applied to
    // the canonical basis, gives (1 +- gamma0) e_j.
    const Mat4 id = Mat4::Identity();
    vecs.col(0) = (id + g0).col(0);
    vecs.col(1) = (id + g0).col(1);
    vecs.col(2) = (id - g0).col(2);
    vecs.col(3) = (id - g0).col(3);
  } else {
    Eigen::Vector2cd chi_plus, chi_minus;
    intrinsic_eigenvectors(mode, chi_plus, chi_minus);

    // Doubling: the +mu eigenspace of slashed-D is spanned by (chi+, chi+)
    // and (chi-, -chi-), where chi+- are the +-mu intrinsic eigenspinors.
    Spinor4 psi_a, psi_b;
    psi_a << chi_plus, chi_plus;
    psi_b << chi_minus, -chi_minus;

    const double t_up = (-mu + root) / m;  // lifts a +mu spinor to +root
    const double t_dn = (-mu - root) / m;  // lifts a +mu spinor to -root

    vecs.col(0) = psi_a + t_up * (g0 * psi_a);
    vecs.col(1) = psi_b + t_up * (g0 * psi_b);
    vecs.col(2) = psi_a + t_dn * (g0 * psi_a);
    vecs.col(3) = psi_b + t_dn * (g0 * psi_b);
  }

  // Modified Gram-Schmidt within each eigenspace, then phase fixing.
  for (int blk = 0; blk < 2; ++blk) {
    const int c0 = 2 * blk, c1 = 2 * blk + 1;
    vecs.col(c0).normalize();
    vecs.col(c1) -= vecs.col(c0).dot(vecs.col(c1)) * vecs.col(c0);
    vecs.col(c1).normalize();
    fix_phase(vecs.col(c0));
    fix_phase(vecs.col(c1));
  }
  basis.vectors = vecs;

  // Cross-check against direct diagonalization.
  const Mat4 symbol = dirac_symbol(mode, m);
  double dev = 0.0;
  for (int j = 0; j < 4; ++j) {
    const Spinor4 r = symbol * vecs.col(j) - basis.lambda(j) * vecs.col(j);
    dev = std::max(dev, r.cwiseAbs().maxCoeff());
  }
  const Mat4 gram = vecs.adjoint() * vecs;
  dev = std::max(dev, (gram - Mat4::Identity()).cwiseAbs().maxCoeff());

  Eigen::SelfAdjointEigenSolver<Mat4> es(symbol);
  // Solver returns ascending eigenvalues: two copies of -root then of +root.
  dev = std::max(dev, std::abs(es.eigenvalues()[0] + root));
  dev = std::max(dev, std::abs(es.eigenvalues()[1] + root));
  dev = std::max(dev, std::abs(es.eigenvalues()[2] - root));
  dev = std::max(dev, std::abs(es.eigenvalues()[3] - root));

  if (dev > 1e-10)
    throw VerificationError("mode_eigenbasis cross-check failed (dev " +
                            std::to_string(dev) + ") at mode (" +
                            std::to_string(mode.n[0]) + "," + std::to_string(mode.n[1]) +
                            "," + std::to_string(mode.n[2]) + ")");
  return basis;
}

std::vector<SpectrumEntry> spectrum_table(const LatticeSpec& lattice, double m) {
  if (!(m > 0.0)) throw ConfigError("spectrum_table requires m > 0");
  std::vector<double> eigenvalues;
  for (const DualMode& mode : enumerate_modes(lattice)) {
    const double root = std::sqrt(mode.mu_abs * mode.mu_abs + m * m);
    eigenvalues.push_back(root);
    eigenvalues.push_back(root);
    eigenvalues.push_back(-root);
    eigenvalues.push_back(-root);
  }
  std::sort(eigenvalues.begin(), eigenvalues.end());

  std::vector<SpectrumEntry> table;
  for (const double lambda : eigenvalues) {
    if (!table.empty() &&
        std::abs(lambda - table.back().lambda) < 1e-9 * std::max(1.0, std::abs(lambda))) {
      ++table.back().multiplicity;
    } else {
      table.push_back({lambda, 1});
    }
  }
  return table;
}

}  // namespace dirac
