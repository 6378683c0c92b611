#include <doctest.h>

#include <cmath>

#include "dirac/errors.hpp"
#include "dirac/rng.hpp"
#include "dirac/spectral.hpp"

using namespace dirac;

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

DualMode make_mode(const LatticeSpec& lat, int n1, int n2, int n3) {
  return enumerate_modes(lat)[mode_index(lat, n1, n2, n3)];
}
}  // namespace

TEST_CASE("enumerate_modes counts and order") {
  LatticeSpec lat{1, 1, 1, 0};
  CHECK(enumerate_modes(lat).size() == 1);
  CHECK(enumerate_modes(lat)[0].mu_abs == 0.0);

  lat.K = 1;
  const auto modes = enumerate_modes(lat);
  CHECK(modes.size() == 27);
  // Lexicographic order: first mode is (-1,-1,-1), center is (0,0,0).
  CHECK(modes.front().n == std::array<int, 3>{-1, -1, -1});
  CHECK(modes[mode_index(lat, 0, 0, 0)].n == std::array<int, 3>{0, 0, 0});
}

TEST_CASE("mode (1,2,0) on the unit lattice has mu = 2 pi sqrt5") {
  LatticeSpec lat{1, 1, 1, 2};
  const DualMode mode = make_mode(lat, 1, 2, 0);
  CHECK(mode.mu_abs == doctest::Approx(kTwoPi * std::sqrt(5.0)).epsilon(1e-15));
}

TEST_CASE("lattice normalization is enforced") {
  LatticeSpec bad{2.0, 1.0, 3.0, 2};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("zero-mode symbol is m gamma0") {
  LatticeSpec lat{1, 1, 1, 1};
  const Mat4 s = dirac_symbol(make_mode(lat, 0, 0, 0), 1.0);
  CHECK((s - gamma(0)).cwiseAbs().maxCoeff() == 0.0);
  const ModeEigenBasis eb = mode_eigenbasis(make_mode(lat, 0, 0, 0), 1.0);
  CHECK(eb.lambda_pos == doctest::Approx(1.0));
  CHECK(eb.lambda_neg == doctest::Approx(-1.0));
}

TEST_CASE("mode (1,0,0) eigenvalues are +-sqrt(4pi^2+1), each twice") {
  LatticeSpec lat{1, 1, 1, 1};
  const Mat4 s = dirac_symbol(make_mode(lat, 1, 0, 0), 1.0);
  Eigen::SelfAdjointEigenSolver<Mat4> es(s);
  const double root = std::sqrt(4.0 * M_PI * M_PI + 1.0);
  CHECK(root == doctest::Approx(6.3623).epsilon(1e-4));
  CHECK(es.eigenvalues()[0] == doctest::Approx(-root).epsilon(1e-12));
  CHECK(es.eigenvalues()[1] == doctest::Approx(-root).epsilon(1e-12));
  CHECK(es.eigenvalues()[2] == doctest::Approx(root).epsilon(1e-12));
  CHECK(es.eigenvalues()[3] == doctest::Approx(root).epsilon(1e-12));
}

TEST_CASE("symbol is Hermitian and traceless on random modes") {
  LatticeSpec lat{0.7, 1.3, 2.1, 6};
  const auto modes = enumerate_modes(lat);
  const CounterRng rng(3, "spectral-hermitian");
  for (int trial = 0; trial < 50; ++trial) {
    const auto& mode = modes[static_cast<std::size_t>(rng.uniform(trial) * modes.size())];
    const Mat4 s = dirac_symbol(mode, 1.7);
    CHECK((s - Mat4(s.adjoint())).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(s.trace()) < 1e-13);
  }
}

TEST_CASE("t-construction closed form at mu = 2pi, m = 1") {
  const double mu = kTwoPi;
  const double t_plus = (-mu + std::sqrt(mu * mu + 1.0)) / 1.0;
  CHECK(t_plus == doctest::Approx(0.0790755).epsilon(1e-5));
}

TEST_CASE("eigenbasis orthonormality and eigen-relation on random modes") {
  LatticeSpec lat{1.0, 1.5, 2.5, 5};
  const auto modes = enumerate_modes(lat);
  const CounterRng rng(4, "spectral-gram");
  for (int trial = 0; trial < 50; ++trial) {
    const auto& mode = modes[static_cast<std::size_t>(rng.uniform(trial) * modes.size())];
    const ModeEigenBasis eb = mode_eigenbasis(mode, 0.8);
    const Mat4 gram = eb.vectors.adjoint() * eb.vectors;
    CHECK((gram - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    const Mat4 s = dirac_symbol(mode, 0.8);
    for (int j = 0; j < 4; ++j) {
      const Spinor4 res = s * eb.vectors.col(j) - eb.lambda(j) * eb.vectors.col(j);
      CHECK(res.cwiseAbs().maxCoeff() < 1e-12);
    }
    // Phase fixing: first nonzero component real positive.
    for (int j = 0; j < 4; ++j) {
      for (int c = 0; c < 4; ++c) {
        const Complex v = eb.vectors(c, j);
        if (std::abs(v) > 1e-12) {
          CHECK(v.real() > 0.0);
          CHECK(std::abs(v.imag()) < 1e-13);
          break;
        }
      }
    }
  }
}

TEST_CASE("zero-mode eigenvectors follow the constant-spinor construction") {
  LatticeSpec lat{1, 1, 1, 0};
  const ModeEigenBasis eb = mode_eigenbasis(make_mode(lat, 0, 0, 0), 2.0);
  // (1 + gamma0) doubles the upper components: eigenvectors e1, e2 for +m.
  CHECK(std::abs(eb.vectors(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(eb.vectors(1, 1) - 1.0) < 1e-14);
  CHECK(std::abs(eb.vectors(2, 2) - 1.0) < 1e-14);
  CHECK(std::abs(eb.vectors(3, 3) - 1.0) < 1e-14);
  CHECK(eb.lambda_pos == doctest::Approx(2.0));
}

TEST_CASE("spectrum table: gap, multiplicities, symmetry") {
  LatticeSpec lat{1, 1, 1, 1};
  const auto table = spectrum_table(lat, 1.0);

  // Smallest positive eigenvalue is m with multiplicity 2.
  double min_pos = 1e300;
  int min_pos_mult = 0;
  for (const auto& e : table)
    if (e.lambda > 0 && e.lambda < min_pos) {
      min_pos = e.lambda;
      min_pos_mult = e.multiplicity;
    }
  CHECK(min_pos == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(min_pos_mult == 2);

  // Next positive eigenvalue sqrt(4pi^2+1) with multiplicity 12 (6 unit modes x 2).
  const double next = std::sqrt(4.0 * M_PI * M_PI + 1.0);
  bool found = false;
  for (const auto& e : table)
    if (std::abs(e.lambda - next) < 1e-9) {
      CHECK(e.multiplicity == 12);
      found = true;
    }
  CHECK(found);

  // Symmetry about zero as a multiset.
  for (const auto& e : table) {
    bool matched = false;
    for (const auto& o : table)
      if (std::abs(o.lambda + e.lambda) < 1e-9 * std::max(1.0, std::abs(e.lambda)) &&
          o.multiplicity == e.multiplicity)
        matched = true;
    CHECK(matched);
  }
}

TEST_CASE("table(m) maps to table(2m) by lambda -> sign(lambda) sqrt(lambda^2+3m^2)") {
  LatticeSpec lat{1.0, 1.0, 2.0, 2};
  const double m = 0.9;
  const auto t1 = spectrum_table(lat, m);
  const auto t2 = spectrum_table(lat, 2.0 * m);
  REQUIRE(t1.size() == t2.size());
  for (std::size_t i = 0; i < t1.size(); ++i) {
    const double mapped = (t1[i].lambda > 0 ? 1.0 : -1.0) *
                          std::sqrt(t1[i].lambda * t1[i].lambda + 3.0 * m * m);
    CHECK(t2[i].lambda == doctest::Approx(mapped).epsilon(1e-12));
    CHECK(t2[i].multiplicity == t1[i].multiplicity);
  }
}
