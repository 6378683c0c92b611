#ifndef DIRAC_TORUS_FIELD_HPP
#define DIRAC_TORUS_FIELD_HPP

#include <memory>
#include <vector>

#include "dirac/spectral.hpp"

namespace dirac {

// Collocation grid for nonlinearity quadrature. The default is
// 2*(2K+1) points per axis (about 2x oversampling); anything below 2K+1
// cannot represent the truncated basis and is rejected.
struct GridDims {
  int n1 = 0, n2 = 0, n3 = 0;

  static GridDims default_for(int K) {
    const int n = 2 * (2 * K + 1);
    return {n, n, n};
  }
  std::size_t point_count() const {
    return static_cast<std::size_t>(n1) * n2 * n3;
  }
  void validate(int K) const;  // throws ConfigError if any axis < 2K+1
};

// Truncated Fourier representation of a spinor field psi: T^3 -> C^4.
// Coefficients are stored mode-major in the canonical enumerate_modes order,
// 4 components per mode, so the flat layout is coeffs[4*mode + component].
class SpinorField {
 public:
  SpinorField() = default;
  SpinorField(const LatticeSpec& lattice, const GridDims& grid)
      : lattice_(lattice), grid_(grid), coeffs_(4 * lattice.mode_count(), Complex(0, 0)) {}

  const LatticeSpec& lattice() const { return lattice_; }
  const GridDims& grid() const { return grid_; }
  std::vector<Complex>& coeffs() { return coeffs_; }
  const std::vector<Complex>& coeffs() const { return coeffs_; }

  Complex& at(int mode, int comp) { return coeffs_[4 * mode + comp]; }
  Complex at(int mode, int comp) const { return coeffs_[4 * mode + comp]; }

  SpinorField& operator+=(const SpinorField& o);
  SpinorField& operator-=(const SpinorField& o);
  SpinorField& operator*=(double s);
  SpinorField& operator*=(Complex s);

  friend SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
  friend SpinorField operator-(SpinorField a, const SpinorField& b) { return a -= b; }
  friend SpinorField operator*(double s, SpinorField a) { return a *= s; }

  // this += s * other
  void axpy(double s, const SpinorField& other);

 private:
  LatticeSpec lattice_;
  GridDims grid_;
  std::vector<Complex> coeffs_;
};

struct EnergyDecomposition {
  SpinorField pos;  // range of P+
  SpinorField neg;  // range of P-
};

enum class NormKind { L2, E, H1 };

class FftEngine;

// Spectral context for a fixed (lattice, grid, mass): canonical mode list,
// per-mode eigenbases of the Dirac symbol, FFT plans. All operator actions
// (D, |D|^s, P+-) are diagonal in the per-mode eigenbases. Fields produced
// and consumed here must carry the same lattice and grid.
class DiracOperator {
 public:
  DiracOperator(const LatticeSpec& lattice, const GridDims& grid, double m);
  ~DiracOperator();

  DiracOperator(const DiracOperator&) = delete;
  DiracOperator& operator=(const DiracOperator&) = delete;

  const LatticeSpec& lattice() const { return lattice_; }
  const GridDims& grid() const { return grid_; }
  double mass() const { return m_; }
  const std::vector<DualMode>& modes() const { return modes_; }
  const ModeEigenBasis& basis(int mode) const { return bases_[mode]; }

  SpinorField make_field() const { return SpinorField(lattice_, grid_); }

  // Pseudospectral transforms; exact inverses on the truncated space.
  // Grid layout is point-major with 4 components per point.
  std::vector<Complex> to_grid(const SpinorField& f) const;
  SpinorField to_modes(const std::vector<Complex>& grid_values) const;

  // Spectral multipliers.
  SpinorField apply_D(const SpinorField& f) const;
  SpinorField apply_absD_pow(const SpinorField& f, double s) const;
  SpinorField project(const SpinorField& f, int sign) const;  // sign = +1 or -1
  EnergyDecomposition split(const SpinorField& f) const;

  // (D - shift)^{-1}; requires shift outside the spectrum, which holds for
  // any |shift| < m. The Newton inner solves use this as preconditioner.
  SpinorField apply_resolvent(const SpinorField& f, double shift) const;

  // Norms. The working E-norm is <|D| psi, psi>^(1/2); the spectral gap
  // min|lambda| = m makes it equivalent to H^{1/2}. The residual dual norm
  // is || |D|^{-1/2} r ||_L2, the discrete stand-in for H^{-1/2}.
  double norm(const SpinorField& f, NormKind kind) const;
  double norm_lq(const SpinorField& f, double q) const;
  double norm_dual_E(const SpinorField& f) const;

  Complex inner_l2(const SpinorField& u, const SpinorField& v) const;
  double inner_l2_real(const SpinorField& u, const SpinorField& v) const;
  double inner_E_real(const SpinorField& u, const SpinorField& v) const;

  // <psi, D psi>_L2 (real by Hermiticity); equals ||P+psi||_E^2 - ||P-psi||_E^2.
  double dirac_form(const SpinorField& f) const;

  // Quadrature weight of one grid point: vol / point_count.
  double quad_weight() const;

  // Translation by an integer grid offset (j1,j2,j3): psi(. - tau) with
  // tau = (l1 j1/n1, l2 j2/n2, l3 j3/n3). Exact on the truncated basis.
  SpinorField shift(const SpinorField& f, int j1, int j2, int j3) const;

 private:
  LatticeSpec lattice_;
  GridDims grid_;
  double m_;
  std::vector<DualMode> modes_;
  std::vector<ModeEigenBasis> bases_;
  std::vector<std::size_t> grid_bin_;  // mode -> flat grid point index
  std::unique_ptr<FftEngine> fft_;
};

}  // namespace dirac

#endif
