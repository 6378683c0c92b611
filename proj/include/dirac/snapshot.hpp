#ifndef DIRAC_TORUS_SNAPSHOT_HPP
#define DIRAC_TORUS_SNAPSHOT_HPP

#include <string>

#include "dirac/field.hpp"

namespace dirac {

// Binary snapshot of a spinor field (little-endian):
//   magic "DIRT3SPN", version u32 = 1, K u32, grid dims 3 x u32,
//   m f64, a f64, eps f64,
//   coefficients as (re, im) f64 pairs in canonical (mode, component) order.
// The lattice lengths are not part of the format; the loader takes them from
// the run configuration.

struct SnapshotHeader {
  int K = 0;
  GridDims grid;
  double m = 0.0, a = 0.0, eps = 0.0;
};

void save_snapshot(const std::string& path, const SpinorField& field, double m,
                   double a, double eps);

// Throws ConfigError on bad magic/version or if K disagrees with `lengths`'s
// truncation; the returned field carries the caller's lattice lengths.
SpinorField load_snapshot(const std::string& path, const LatticeSpec& lengths,
                          SnapshotHeader* header_out = nullptr);

}  // namespace dirac

#endif
