#include "dirac/field.hpp"

#include <cmath>

#include "dirac/errors.hpp"
#include "fft_engine.hpp"

namespace dirac {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

void check_same_space(const SpinorField& a, const SpinorField& b) {
  if (a.coeffs().size() != b.coeffs().size())
    throw std::invalid_argument("spinor fields live on different truncations");
}
}  // namespace

void GridDims::validate(int K) const {
  const int need = 2 * K + 1;
  if (n1 < need || n2 < need || n3 < need)
    throw ConfigError("grid dims must be >= 2K+1 = " + std::to_string(need) +
                      " per axis to hold the truncated modes");
}

SpinorField& SpinorField::operator+=(const SpinorField& o) {
  check_same_space(*this, o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpinorField& SpinorField::operator-=(const SpinorField& o) {
  check_same_space(*this, o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SpinorField& SpinorField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

SpinorField& SpinorField::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

void SpinorField::axpy(double s, const SpinorField& other) {
  check_same_space(*this, other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * other.coeffs_[i];
}

DiracOperator::DiracOperator(const LatticeSpec& lattice, const GridDims& grid, double m)
    : lattice_(lattice), grid_(grid), m_(m) {
  lattice_.validate();
  grid_.validate(lattice_.K);
  if (!(m > 0.0)) throw ConfigError("DiracOperator requires m > 0");

  modes_ = enumerate_modes(lattice_);
  bases_.reserve(modes_.size());
  grid_bin_.reserve(modes_.size());
  for (const DualMode& mode : modes_) {
    bases_.push_back(mode_eigenbasis(mode, m_));
    const int b1 = ((mode.n[0] % grid_.n1) + grid_.n1) % grid_.n1;
    const int b2 = ((mode.n[1] % grid_.n2) + grid_.n2) % grid_.n2;
    const int b3 = ((mode.n[2] % grid_.n3) + grid_.n3) % grid_.n3;
    grid_bin_.push_back((static_cast<std::size_t>(b1) * grid_.n2 + b2) * grid_.n3 + b3);
  }
  fft_ = std::make_unique<FftEngine>(std::array<int, 3>{grid_.n1, grid_.n2, grid_.n3});
}

DiracOperator::~DiracOperator() = default;

std::vector<Complex> DiracOperator::to_grid(const SpinorField& f) const {
  std::vector<Complex> grid(grid_.point_count() * 4, Complex(0, 0));
  const auto& c = f.coeffs();
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const std::size_t bin = grid_bin_[i] * 4;
    for (int comp = 0; comp < 4; ++comp) grid[bin + comp] = c[4 * i + comp];
  }
  fft_->backward(grid.data());
  return grid;
}

SpinorField DiracOperator::to_modes(const std::vector<Complex>& grid_values) const {
  if (grid_values.size() != grid_.point_count() * 4)
    throw std::invalid_argument("grid buffer size mismatch");
  std::vector<Complex> work = grid_values;
  fft_->forward(work.data());
  const double scale = 1.0 / static_cast<double>(grid_.point_count());
  SpinorField f(lattice_, grid_);
  auto& c = f.coeffs();
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const std::size_t bin = grid_bin_[i] * 4;
    for (int comp = 0; comp < 4; ++comp) c[4 * i + comp] = scale * work[bin + comp];
  }
  return f;
}

SpinorField DiracOperator::apply_D(const SpinorField& f) const {
  SpinorField out(lattice_, grid_);
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const ModeEigenBasis& eb = bases_[i];
    Eigen::Map<const Spinor4> c(&f.coeffs()[4 * i]);
    Eigen::Map<Spinor4> o(&out.coeffs()[4 * i]);
    Spinor4 d = eb.vectors.adjoint() * c;
    for (int j = 0; j < 4; ++j) d[j] *= eb.lambda(j);
    o = eb.vectors * d;
  }
  return out;
}

SpinorField DiracOperator::apply_absD_pow(const SpinorField& f, double s) const {
  SpinorField out(lattice_, grid_);
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const ModeEigenBasis& eb = bases_[i];
    Eigen::Map<const Spinor4> c(&f.coeffs()[4 * i]);
    Eigen::Map<Spinor4> o(&out.coeffs()[4 * i]);
    Spinor4 d = eb.vectors.adjoint() * c;
    for (int j = 0; j < 4; ++j) d[j] *= std::pow(std::abs(eb.lambda(j)), s);
    o = eb.vectors * d;
  }
  return out;
}

SpinorField DiracOperator::project(const SpinorField& f, int sign) const {
  SpinorField out(lattice_, grid_);
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const ModeEigenBasis& eb = bases_[i];
    Eigen::Map<const Spinor4> c(&f.coeffs()[4 * i]);
    Eigen::Map<Spinor4> o(&out.coeffs()[4 * i]);
    Spinor4 d = eb.vectors.adjoint() * c;
    if (sign > 0) {
      d[2] = d[3] = Complex(0, 0);
    } else {
      d[0] = d[1] = Complex(0, 0);
    }
    o = eb.vectors * d;
  }
  return out;
}

EnergyDecomposition DiracOperator::split(const SpinorField& f) const {
  return {project(f, +1), project(f, -1)};
}

SpinorField DiracOperator::apply_resolvent(const SpinorField& f, double shift) const {
  if (std::abs(shift) >= m_)
    throw std::invalid_argument("apply_resolvent: shift inside the spectral gap required");
  SpinorField out(lattice_, grid_);
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const ModeEigenBasis& eb = bases_[i];
    Eigen::Map<const Spinor4> c(&f.coeffs()[4 * i]);
    Eigen::Map<Spinor4> o(&out.coeffs()[4 * i]);
    Spinor4 d = eb.vectors.adjoint() * c;
    for (int j = 0; j < 4; ++j) d[j] /= (eb.lambda(j) - shift);
    o = eb.vectors * d;
  }
  return out;
}

double DiracOperator::norm(const SpinorField& f, NormKind kind) const {
  const double vol = lattice_.vol();
  double acc = 0.0;
  switch (kind) {
    case NormKind::L2:
      for (const Complex& c : f.coeffs()) acc += std::norm(c);
      break;
    case NormKind::E:
      for (std::size_t i = 0; i < modes_.size(); ++i) {
        const ModeEigenBasis& eb = bases_[i];
        Eigen::Map<const Spinor4> c(&f.coeffs()[4 * i]);
        const Spinor4 d = eb.vectors.adjoint() * c;
        for (int j = 0; j < 4; ++j) acc += std::abs(eb.lambda(j)) * std::norm(d[j]);
      }
      break;
    case NormKind::H1:
      for (std::size_t i = 0; i < modes_.size(); ++i) {
        const double mu = modes_[i].mu_abs;
        const double w = 1.0 + mu * mu;  // 1 + 4 pi^2 |zeta*|^2
        for (int comp = 0; comp < 4; ++comp) acc += w * std::norm(f.at(i, comp));
      }
      break;
  }
  return std::sqrt(vol * acc);
}

double DiracOperator::norm_lq(const SpinorField& f, double q) const {
  if (!(q >= 1.0)) throw std::invalid_argument("norm_lq requires q >= 1");
  const std::vector<Complex> grid = to_grid(f);
  double acc = 0.0;
  for (std::size_t p = 0; p < grid.size(); p += 4) {
    const double mag2 = std::norm(grid[p]) + std::norm(grid[p + 1]) +
                        std::norm(grid[p + 2]) + std::norm(grid[p + 3]);
    acc += std::pow(mag2, 0.5 * q);
  }
  return std::pow(quad_weight() * acc, 1.0 / q);
}

double DiracOperator::norm_dual_E(const SpinorField& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const ModeEigenBasis& eb = bases_[i];
    Eigen::Map<const Spinor4> c(&f.coeffs()[4 * i]);
    const Spinor4 d = eb.vectors.adjoint() * c;
    for (int j = 0; j < 4; ++j) acc += std::norm(d[j]) / std::abs(eb.lambda(j));
  }
  return std::sqrt(lattice_.vol() * acc);
}

Complex DiracOperator::inner_l2(const SpinorField& u, const SpinorField& v) const {
  check_same_space(u, v);
  Complex acc(0, 0);
  for (std::size_t i = 0; i < u.coeffs().size(); ++i)
    acc += std::conj(u.coeffs()[i]) * v.coeffs()[i];
  return lattice_.vol() * acc;
}

double DiracOperator::inner_l2_real(const SpinorField& u, const SpinorField& v) const {
  return inner_l2(u, v).real();
}

double DiracOperator::inner_E_real(const SpinorField& u, const SpinorField& v) const {
  check_same_space(u, v);
  double acc = 0.0;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const ModeEigenBasis& eb = bases_[i];
    Eigen::Map<const Spinor4> cu(&u.coeffs()[4 * i]);
    Eigen::Map<const Spinor4> cv(&v.coeffs()[4 * i]);
    const Spinor4 du = eb.vectors.adjoint() * cu;
    const Spinor4 dv = eb.vectors.adjoint() * cv;
    for (int j = 0; j < 4; ++j)
      acc += std::abs(eb.lambda(j)) * (std::conj(du[j]) * dv[j]).real();
  }
  return lattice_.vol() * acc;
}

double DiracOperator::dirac_form(const SpinorField& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const ModeEigenBasis& eb = bases_[i];
    Eigen::Map<const Spinor4> c(&f.coeffs()[4 * i]);
    const Spinor4 d = eb.vectors.adjoint() * c;
    for (int j = 0; j < 4; ++j) acc += eb.lambda(j) * std::norm(d[j]);
  }
  return lattice_.vol() * acc;
}

double DiracOperator::quad_weight() const {
  return lattice_.vol() / static_cast<double>(grid_.point_count());
}

SpinorField DiracOperator::shift(const SpinorField& f, int j1, int j2, int j3) const {
  SpinorField out = f;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto& n = modes_[i].n;
    const double phase =
        -kTwoPi * (static_cast<double>(n[0]) * j1 / grid_.n1 +
                   static_cast<double>(n[1]) * j2 / grid_.n2 +
                   static_cast<double>(n[2]) * j3 / grid_.n3);
    const Complex ph(std::cos(phase), std::sin(phase));
    for (int comp = 0; comp < 4; ++comp) out.at(i, comp) *= ph;
  }
  return out;
}

}  // namespace dirac
