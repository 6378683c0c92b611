#ifndef DIRAC_TORUS_CLIFFORD_HPP
#define DIRAC_TORUS_CLIFFORD_HPP

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>
#include <vector>

namespace dirac {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Spinor4 = Eigen::Vector4cd;

// Exact 2x2 and 4x4 gamma-matrix algebra in the Dirac representation:
//   gamma0 = diag(1,1,-1,-1),  gamma^k = ( 0  sigma_k ; -sigma_k  0 ),
//   gamma5 = gamma0 gamma1 gamma2 gamma3.
// All entries are 0, +-1 or +-i, so every identity below holds exactly in
// floating point.

Mat2 pauli(int k);          // k in {1,2,3}
Mat4 gamma(int mu);         // mu in {0,1,2,3}; throws std::out_of_range otherwise
Mat4 gamma5();              // gamma0*gamma1*gamma2*gamma3
Mat4 alpha_mat(int k);      // gamma0*gamma^k, Hermitian; k in {1,2,3}

// Lorentz-scalar bilinear psibar psi = <gamma0 psi, psi> = |psi_up|^2 - |psi_low|^2.
double dirac_bilinear(const Spinor4& psi);

// Pseudoscalar bilinear <gamma0 gamma5 psi, psi>. Returned as a complex value
// so models can form |.|^q once. With gamma5 = gamma0 gamma1 gamma2 gamma3
// (no factor i) the matrix gamma0*gamma5 is Hermitian and the value is real;
// only the modulus is consumed downstream, which is convention independent.
Complex gamma5_bilinear(const Spinor4& psi);

struct CliffordCheck {
  std::string name;
  double max_abs_dev = 0.0;  // exact arithmetic: pass means exactly zero
  bool pass = false;
};

struct CliffordReport {
  std::vector<CliffordCheck> checks;
  bool all_pass = true;
  const CliffordCheck* first_failure() const {
    for (const auto& c : checks)
      if (!c.pass) return &c;
    return nullptr;
  }
};

// Verifies the 22 matrix identities of the representation with zero tolerance:
//   6  sigma^j sigma^k + sigma^k sigma^j = 2 delta^{jk} I2      (j<=k)
//   6  gamma^j gamma^k + gamma^k gamma^j = -2 delta^{jk} I4     (j<=k)
//   3  gamma0 gamma^k + gamma^k gamma0 = 0
//   1  (gamma0)^2 = I4
//   3  alpha_k = gamma0 gamma^k Hermitian
//   3  (-i gamma0 gamma^k)(-i gamma0 gamma^j) + (j<->k) = -2 delta^{jk} I4  (j<k)
CliffordReport verify_clifford();

// Same checks against caller-supplied gamma matrices (fault injection in tests).
CliffordReport verify_clifford(const std::array<Mat4, 4>& gammas);

}  // namespace dirac

#endif
