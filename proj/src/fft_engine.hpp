#ifndef DIRAC_TORUS_FFT_ENGINE_HPP
#define DIRAC_TORUS_FFT_ENGINE_HPP

#include <array>
#include <complex>
#include <cstddef>

#include <fftw3.h>

namespace dirac {

// Thin FFTW wrapper for the 4-component spinor grid. Data layout is
// point-major: index ((i1*N2 + i2)*N3 + i3)*4 + component. One plan per
// direction transforms all four interleaved components.
//
// Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED so that planning is
// deterministic and the plans run on any caller buffer.
class FftEngine {
 public:
  explicit FftEngine(std::array<int, 3> dims);
  ~FftEngine();

  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

  // In-place unnormalized synthesis (sign +1): bins -> grid values.
  void backward(std::complex<double>* data) const;
  // In-place unnormalized analysis (sign -1); divide by point_count() to get
  // Fourier coefficients.
  void forward(std::complex<double>* data) const;

  std::size_t point_count() const {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }

 private:
  std::array<int, 3> dims_;
  fftw_plan plan_fwd_ = nullptr;
  fftw_plan plan_bwd_ = nullptr;
};

}  // namespace dirac

#endif
