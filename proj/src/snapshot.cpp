#include "dirac/snapshot.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "dirac/errors.hpp"

namespace dirac {

namespace {

constexpr char kMagic[8] = {'D', 'I', 'R', 'T', '3', 'S', 'P', 'N'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double read_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void save_snapshot(const std::string& path, const SpinorField& field, double m,
                   double a, double eps) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open snapshot for writing: " + path);
  os.write(kMagic, 8);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(field.lattice().K));
  write_u32(os, static_cast<std::uint32_t>(field.grid().n1));
  write_u32(os, static_cast<std::uint32_t>(field.grid().n2));
  write_u32(os, static_cast<std::uint32_t>(field.grid().n3));
  write_f64(os, m);
  write_f64(os, a);
  write_f64(os, eps);
  for (const Complex& c : field.coeffs()) {
    write_f64(os, c.real());
    write_f64(os, c.imag());
  }
  if (!os) throw ConfigError("short write on snapshot: " + path);
}

SpinorField load_snapshot(const std::string& path, const LatticeSpec& lengths,
                          SnapshotHeader* header_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open snapshot: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw ConfigError("bad snapshot magic in " + path);
  if (read_u32(is) != kVersion) throw ConfigError("unsupported snapshot version in " + path);

  SnapshotHeader hdr;
  hdr.K = static_cast<int>(read_u32(is));
  hdr.grid.n1 = static_cast<int>(read_u32(is));
  hdr.grid.n2 = static_cast<int>(read_u32(is));
  hdr.grid.n3 = static_cast<int>(read_u32(is));
  hdr.m = read_f64(is);
  hdr.a = read_f64(is);
  hdr.eps = read_f64(is);

  if (hdr.K != lengths.K)
    throw ConfigError("snapshot K=" + std::to_string(hdr.K) +
                      " disagrees with configured K=" + std::to_string(lengths.K));

  LatticeSpec lattice = lengths;
  SpinorField field(lattice, hdr.grid);
  for (Complex& c : field.coeffs()) {
    const double re = read_f64(is);
    const double im = read_f64(is);
    c = Complex(re, im);
  }
  if (!is) throw ConfigError("snapshot truncated: " + path);
  if (header_out) *header_out = hdr;
  return field;
}

}  // namespace dirac
