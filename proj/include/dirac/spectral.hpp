#ifndef DIRAC_TORUS_SPECTRAL_HPP
#define DIRAC_TORUS_SPECTRAL_HPP

#include <array>
#include <vector>

#include "dirac/clifford.hpp"

namespace dirac {

// Rectangular lattice Gamma = l1 Z x l2 Z x l3 Z with cubic Fourier
// truncation |n_i| <= K. Normalization 0 < l1 <= l2 <= l3.
struct LatticeSpec {
  double l1 = 1.0, l2 = 1.0, l3 = 1.0;
  int K = 8;

  double vol() const { return l1 * l2 * l3; }
  int modes_per_axis() const { return 2 * K + 1; }
  int mode_count() const {
    const int n = modes_per_axis();
    return n * n * n;
  }
  void validate() const;  // throws ConfigError on violation
};

// One dual-lattice frequency: integer triple n, dual vector
// zeta* = (n1/l1, n2/l2, n3/l3) and the intrinsic eigenvalue magnitude
// mu = 2 pi |zeta*|.
struct DualMode {
  std::array<int, 3> n{0, 0, 0};
  std::array<double, 3> zeta_star{0.0, 0.0, 0.0};
  double mu_abs = 0.0;
};

// All (2K+1)^3 modes in lexicographic order of (n1,n2,n3), each axis running
// -K..K. This order is the canonical coefficient layout everywhere.
std::vector<DualMode> enumerate_modes(const LatticeSpec& lattice);

// Flat index of mode n in the canonical order.
int mode_index(const LatticeSpec& lattice, int n1, int n2, int n3);

// Symbol of the physical Dirac operator on the plane wave exp(2 pi i zeta*.theta):
//   sum_k 2 pi zeta*_k (gamma0 gamma^k) + m gamma0.
// Hermitian and traceless.
Mat4 dirac_symbol(const DualMode& mode, double m);

// Per-mode eigendecomposition of the symbol. Eigenvalues are
// +-sqrt(mu^2 + m^2), each of multiplicity exactly 2. Columns 0,1 of
// `vectors` span the positive eigenspace, columns 2,3 the negative one.
//
// The eigenvectors are built from the intrinsic-operator eigenspinors by the
// map psi -> psi + t gamma0 psi with t = (-mu +- sqrt(mu^2+m^2))/m, then
// orthonormalized and phase-fixed (first nonzero component real positive).
struct ModeEigenBasis {
  DualMode mode;
  double lambda_pos = 0.0, lambda_neg = 0.0;
  Mat4 vectors;  // unitary; columns are eigenvectors

  double lambda(int j) const { return j < 2 ? lambda_pos : lambda_neg; }
};

// Throws VerificationError if the construction fails its cross-check against
// direct numerical diagonalization at 1e-10 (an implementation bug, not a
// user error).
ModeEigenBasis mode_eigenbasis(const DualMode& mode, double m);

struct SpectrumEntry {
  double lambda = 0.0;
  int multiplicity = 0;
};

// Aggregated spectrum of the truncated operator, sorted ascending. Two
// eigenvalues coincide when |li - lj| < 1e-9 * max(1, |li|).
std::vector<SpectrumEntry> spectrum_table(const LatticeSpec& lattice, double m);

}  // namespace dirac

#endif
