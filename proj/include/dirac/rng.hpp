#ifndef DIRAC_TORUS_RNG_HPP
#define DIRAC_TORUS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

namespace dirac {

// Counter-based deterministic generator. Every random draw in the project is
// addressed as (seed, stream name, counter), so results are independent of
// call order and identical across runs with the same config.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view stream)
      : key_(mix(seed ^ fnv1a(stream))) {}

  // Uniform in [0,1), 53-bit resolution.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(mix(key_ ^ mix(counter + 0x9e3779b97f4a7c15ull)) >> 11) *
           0x1.0p-53;
  }

  // Uniform in (0,1): never returns 0, safe as a Box-Muller radius.
  double uniform_open(std::uint64_t counter) const {
    const double u = uniform(counter);
    return u > 0.0 ? u : 0x1.0p-53;
  }

  // Standard normal via Box-Muller; one value per counter.
  double gaussian(std::uint64_t counter) const {
    const double u1 = uniform_open(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

 private:
  // splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t key_;
};

// Halton low-discrepancy sequence, one dimension per prime base.
inline double halton(std::uint64_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  std::uint64_t i = index + 1;  // skip the origin
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

// Inverse of the standard normal CDF (Acklam's rational approximation,
// relative error < 1.2e-9); turns Halton points into Gaussian directions.
inline double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  if (p <= 0.0) p = 1e-300;
  if (p >= 1.0) p = 1.0 - 1e-16;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > phigh) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace dirac

#endif
