#include "fft_engine.hpp"

#include <vector>

namespace dirac {

FftEngine::FftEngine(std::array<int, 3> dims) : dims_(dims) {
  // Plan on a scratch buffer; FFTW_UNALIGNED keeps the plan valid for the
  // new-array execute interface on arbitrary caller storage.
  std::vector<std::complex<double>> scratch(point_count() * 4);
  fftw_complex* p = reinterpret_cast<fftw_complex*>(scratch.data());
  const int n[3] = {dims_[0], dims_[1], dims_[2]};
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plan_fwd_ = fftw_plan_many_dft(3, n, 4, p, nullptr, 4, 1, p, nullptr, 4, 1,
                                 FFTW_FORWARD, flags);
  plan_bwd_ = fftw_plan_many_dft(3, n, 4, p, nullptr, 4, 1, p, nullptr, 4, 1,
                                 FFTW_BACKWARD, flags);
}

FftEngine::~FftEngine() {
  if (plan_fwd_) fftw_destroy_plan(plan_fwd_);
  if (plan_bwd_) fftw_destroy_plan(plan_bwd_);
}

void FftEngine::backward(std::complex<double>* data) const {
  fftw_complex* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_bwd_, p, p);
}

void FftEngine::forward(std::complex<double>* data) const {
  fftw_complex* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_fwd_, p, p);
}

}  // namespace dirac
