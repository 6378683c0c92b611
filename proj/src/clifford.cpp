#include "dirac/clifford.hpp"

#include <stdexcept>

namespace dirac {

namespace {
const Complex I(0.0, 1.0);
}

Mat2 pauli(int k) {
  Mat2 s;
  switch (k) {
    case 1:
      s << 0, 1, 1, 0;
      break;
    case 2:
      s << 0, -I, I, 0;
      break;
    case 3:
      s << 1, 0, 0, -1;
      break;
    default:
      throw std::out_of_range("pauli: index must be 1, 2 or 3");
  }
  return s;
}

Mat4 gamma(int mu) {
  Mat4 g = Mat4::Zero();
  if (mu == 0) {
    g.diagonal() << 1, 1, -1, -1;
    return g;
  }
  if (mu < 1 || mu > 3) throw std::out_of_range("gamma: index must be 0..3");
  const Mat2 s = pauli(mu);
  g.block<2, 2>(0, 2) = s;
  g.block<2, 2>(2, 0) = -s;
  return g;
}

Mat4 gamma5() { return gamma(0) * gamma(1) * gamma(2) * gamma(3); }

Mat4 alpha_mat(int k) { return gamma(0) * gamma(k); }

double dirac_bilinear(const Spinor4& psi) {
  return std::norm(psi[0]) + std::norm(psi[1]) - std::norm(psi[2]) - std::norm(psi[3]);
}

Complex gamma5_bilinear(const Spinor4& psi) {
  // gamma0*gamma5 = gamma1*gamma2*gamma3 = ( 0 -iI2 ; iI2 0 )
  const Spinor4 g05psi(-I * psi[2], -I * psi[3], I * psi[0], I * psi[1]);
  return g05psi.dot(psi);  // Eigen dot conjugates the first argument
}

namespace {

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

void push(CliffordReport& rep, std::string name, double dev) {
  CliffordCheck c;
  c.name = std::move(name);
  c.max_abs_dev = dev;
  c.pass = (dev == 0.0);
  if (!c.pass) rep.all_pass = false;
  rep.checks.push_back(std::move(c));
}

}  // namespace

CliffordReport verify_clifford(const std::array<Mat4, 4>& g) {
  CliffordReport rep;
  const Mat2 I2 = Mat2::Identity();
  const Mat4 I4 = Mat4::Identity();

  for (int j = 1; j <= 3; ++j)
    for (int k = j; k <= 3; ++k) {
      const Mat2 lhs = pauli(j) * pauli(k) + pauli(k) * pauli(j);
      const Mat2 rhs = (j == k) ? Mat2(2.0 * I2) : Mat2(Mat2::Zero());
      push(rep, "sigma" + std::to_string(j) + "*sigma" + std::to_string(k) + " anticommutator",
           max_abs(lhs - rhs));
    }

  for (int j = 1; j <= 3; ++j)
    for (int k = j; k <= 3; ++k) {
      const Mat4 lhs = g[j] * g[k] + g[k] * g[j];
      const Mat4 rhs = (j == k) ? Mat4(-2.0 * I4) : Mat4(Mat4::Zero());
      push(rep, "gamma" + std::to_string(j) + "*gamma" + std::to_string(k) + " anticommutator",
           max_abs(lhs - rhs));
    }

  for (int k = 1; k <= 3; ++k)
    push(rep, "gamma0*gamma" + std::to_string(k) + " anticommutator",
         max_abs(g[0] * g[k] + g[k] * g[0]));

  push(rep, "gamma0 squared", max_abs(g[0] * g[0] - I4));

  for (int k = 1; k <= 3; ++k) {
    const Mat4 a = g[0] * g[k];
    push(rep, "alpha" + std::to_string(k) + " Hermitian", max_abs(a - Mat4(a.adjoint())));
  }

  // Coefficients of the geometric Dirac operator: (-i gamma0 gamma^k).
  for (int j = 1; j <= 3; ++j)
    for (int k = j + 1; k <= 3; ++k) {
      const Mat4 cj = -I * g[0] * g[j];
      const Mat4 ck = -I * g[0] * g[k];
      push(rep,
           "slashed coefficient " + std::to_string(j) + "," + std::to_string(k) +
               " anticommutator",
           max_abs(cj * ck + ck * cj));
    }

  return rep;
}

CliffordReport verify_clifford() {
  return verify_clifford({gamma(0), gamma(1), gamma(2), gamma(3)});
}

}  // namespace dirac
