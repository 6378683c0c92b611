#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dirac/errors.hpp"
#include "dirac/field.hpp"
#include "dirac/rng.hpp"
#include "dirac/snapshot.hpp"

using namespace dirac;

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

SpinorField random_field(const DiracOperator& op, std::uint64_t seed, double amp = 1.0) {
  const CounterRng rng(seed, "field-random");
  SpinorField f = op.make_field();
  std::uint64_t ctr = 0;
  for (std::size_t i = 0; i < f.coeffs().size(); ++i) {
    const double decay = 1.0 / (1.0 + op.modes()[i / 4].mu_abs);
    f.coeffs()[i] = amp * decay * Complex(rng.gaussian(ctr++), rng.gaussian(ctr++));
  }
  return f;
}

}  // namespace

TEST_CASE("grid validation rejects undersized grids") {
  GridDims g{8, 8, 8};
  CHECK_THROWS_AS(g.validate(4), ConfigError);  // needs 2K+1 = 9
  GridDims ok{9, 9, 9};
  CHECK_NOTHROW(ok.validate(4));
  CHECK(GridDims::default_for(4).n1 == 18);
}

TEST_CASE("constant field round trips exactly") {
  LatticeSpec lat{1, 1, 1, 2};
  DiracOperator op(lat, GridDims::default_for(2), 1.0);
  SpinorField f = op.make_field();
  f.at(mode_index(lat, 0, 0, 0), 0) = 1.0;

  const auto grid = op.to_grid(f);
  for (std::size_t p = 0; p < grid.size(); p += 4) {
    CHECK(std::abs(grid[p] - Complex(1, 0)) < 1e-14);
    CHECK(std::abs(grid[p + 1]) < 1e-14);
  }
  const SpinorField back = op.to_modes(grid);
  for (std::size_t i = 0; i < f.coeffs().size(); ++i)
    CHECK(std::abs(back.coeffs()[i] - f.coeffs()[i]) < 1e-14);
}

TEST_CASE("single mode evaluates to its plane wave") {
  LatticeSpec lat{2.0, 2.0, 2.0, 2};
  const GridDims g = GridDims::default_for(2);
  DiracOperator op(lat, g, 1.0);
  SpinorField f = op.make_field();
  f.at(mode_index(lat, 1, 0, 0), 2) = 1.0;

  const auto grid = op.to_grid(f);
  for (int i1 = 0; i1 < g.n1; ++i1) {
    // theta1 = l1*i1/n1; phase = 2pi * (n1/l1) * theta1 = 2pi * i1/n1.
    const Complex expect = std::polar(1.0, kTwoPi * i1 / g.n1);
    const std::size_t p = (static_cast<std::size_t>(i1) * g.n2 * g.n3) * 4;
    CHECK(std::abs(grid[p + 2] - expect) < 1e-13);
    CHECK(std::abs(grid[p + 0]) < 1e-14);
  }
}

TEST_CASE("random field round trip below 1e-12") {
  LatticeSpec lat{1.0, 1.3, 1.9, 3};
  DiracOperator op(lat, GridDims::default_for(3), 1.2);
  const SpinorField f = random_field(op, 11);
  const SpinorField back = op.to_modes(op.to_grid(f));
  double worst = 0.0;
  for (std::size_t i = 0; i < f.coeffs().size(); ++i)
    worst = std::max(worst, std::abs(back.coeffs()[i] - f.coeffs()[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("Parseval: grid L2 equals coefficient L2") {
  LatticeSpec lat{1.0, 1.0, 2.0, 3};
  DiracOperator op(lat, GridDims::default_for(3), 1.0);
  const SpinorField f = random_field(op, 12);
  const auto grid = op.to_grid(f);
  double grid_l2 = 0.0;
  for (const Complex& v : grid) grid_l2 += std::norm(v);
  grid_l2 = std::sqrt(op.quad_weight() * grid_l2);
  CHECK(grid_l2 == doctest::Approx(op.norm(f, NormKind::L2)).epsilon(1e-12));
}

TEST_CASE("apply_D on the constant upper spinor gives m psi") {
  LatticeSpec lat{1, 1, 1, 2};
  const double m = 1.0;
  DiracOperator op(lat, GridDims::default_for(2), m);
  SpinorField e = op.make_field();
  e.at(mode_index(lat, 0, 0, 0), 0) = 1.0;
  const SpinorField De = op.apply_D(e);
  SpinorField diff = De;
  diff.axpy(-m, e);
  CHECK(op.norm(diff, NormKind::L2) < 1e-13);
}

TEST_CASE("apply_absD_pow: s=2 equals D applied twice; s=0 is the identity") {
  LatticeSpec lat{1.0, 1.1, 1.7, 2};
  DiracOperator op(lat, GridDims::default_for(2), 0.7);
  const SpinorField f = random_field(op, 13);

  const SpinorField dd = op.apply_D(op.apply_D(f));
  const SpinorField abs2 = op.apply_absD_pow(f, 2.0);
  SpinorField diff = dd;
  diff -= abs2;
  CHECK(op.norm(diff, NormKind::L2) < 1e-12 * op.norm(dd, NormKind::L2) + 1e-12);

  const SpinorField id = op.apply_absD_pow(f, 0.0);
  SpinorField diff0 = id;
  diff0 -= f;
  CHECK(op.norm(diff0, NormKind::L2) < 1e-13);
}

TEST_CASE("projectors: constants split by upper/lower components") {
  LatticeSpec lat{1, 1, 1, 1};
  DiracOperator op(lat, GridDims::default_for(1), 1.0);

  SpinorField up = op.make_field();
  up.at(mode_index(lat, 0, 0, 0), 0) = 1.0;
  CHECK(op.norm(op.project(up, -1), NormKind::L2) < 1e-14);
  SpinorField pup = op.project(up, +1);
  pup -= up;
  CHECK(op.norm(pup, NormKind::L2) < 1e-14);

  SpinorField low = op.make_field();
  low.at(mode_index(lat, 0, 0, 0), 2) = 1.0;
  CHECK(op.norm(op.project(low, +1), NormKind::L2) < 1e-14);
}

TEST_CASE("projector identities on random fields") {
  LatticeSpec lat{0.9, 1.2, 1.8, 3};
  DiracOperator op(lat, GridDims::default_for(3), 1.4);
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const SpinorField f = random_field(op, seed);
    const EnergyDecomposition d = op.split(f);

    // Complementarity.
    SpinorField sum = d.pos;
    sum += d.neg;
    sum -= f;
    CHECK(op.norm(sum, NormKind::L2) < 1e-12);

    // Idempotence.
    SpinorField pp = op.project(d.pos, +1);
    pp -= d.pos;
    CHECK(op.norm(pp, NormKind::L2) < 1e-12);

    // L2 and E orthogonality.
    CHECK(std::abs(op.inner_l2(d.pos, d.neg)) < 1e-12);
    CHECK(std::abs(op.inner_E_real(d.pos, d.neg)) < 1e-12);

    // Pythagoras in L2.
    const double l2 = op.norm(f, NormKind::L2);
    const double lp = op.norm(d.pos, NormKind::L2);
    const double ln = op.norm(d.neg, NormKind::L2);
    CHECK(std::abs(l2 * l2 - lp * lp - ln * ln) < 1e-12 * (1.0 + l2 * l2));

    // <D psi, psi> = ||psi+||_E^2 - ||psi-||_E^2.
    const double ep = op.norm(d.pos, NormKind::E);
    const double en = op.norm(d.neg, NormKind::E);
    CHECK(std::abs(op.dirac_form(f) - ep * ep + en * en) < 1e-10 * (1.0 + ep * ep + en * en));
  }
}

TEST_CASE("norms on the constant field") {
  LatticeSpec lat{1, 1, 1, 2};
  DiracOperator op(lat, GridDims::default_for(2), 1.0);
  SpinorField f = op.make_field();
  f.at(mode_index(lat, 0, 0, 0), 0) = 1.0;

  CHECK(op.norm(f, NormKind::L2) == doctest::Approx(1.0).epsilon(1e-14));
  const double e = op.norm(f, NormKind::E);
  CHECK(e * e == doctest::Approx(1.0).epsilon(1e-13));  // E^2 = m L2^2 = 1

  // L3 of a constant c e1 on vol-1 lattice: |c| vol^{1/3}.
  SpinorField g = op.make_field();
  g.at(mode_index(lat, 0, 0, 0), 0) = 2.5;
  CHECK(op.norm_lq(g, 3.0) == doctest::Approx(2.5).epsilon(1e-13));
}

TEST_CASE("spectral gap: E^2 >= m L2^2 on random fields") {
  LatticeSpec lat{1.0, 1.0, 1.5, 2};
  const double m = 1.3;
  DiracOperator op(lat, GridDims::default_for(2), m);
  for (std::uint64_t seed = 30; seed < 80; ++seed) {
    const SpinorField f = random_field(op, seed);
    const double e = op.norm(f, NormKind::E);
    const double l2 = op.norm(f, NormKind::L2);
    CHECK(e * e >= m * l2 * l2 * (1.0 - 1e-12));
  }
}

TEST_CASE("apply_D is symmetric in the real L2 pairing") {
  LatticeSpec lat{1.0, 1.2, 1.4, 2};
  DiracOperator op(lat, GridDims::default_for(2), 1.0);
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    const SpinorField u = random_field(op, seed);
    const SpinorField v = random_field(op, seed + 100);
    const double a = op.inner_l2_real(op.apply_D(u), v);
    const double b = op.inner_l2_real(u, op.apply_D(v));
    CHECK(std::abs(a - b) < 1e-10 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("resolvent inverts D - shift") {
  LatticeSpec lat{1, 1, 1, 2};
  DiracOperator op(lat, GridDims::default_for(2), 1.0);
  const SpinorField f = random_field(op, 50);
  const SpinorField x = op.apply_resolvent(f, 0.5);
  SpinorField back = op.apply_D(x);
  back.axpy(-0.5, x);
  back -= f;
  CHECK(op.norm(back, NormKind::L2) < 1e-11);
  CHECK_THROWS_AS(op.apply_resolvent(f, 1.0), std::invalid_argument);
}

TEST_CASE("dual norm matches |D|^{-1/2} L2 norm") {
  LatticeSpec lat{1.0, 1.0, 1.0, 2};
  DiracOperator op(lat, GridDims::default_for(2), 0.9);
  const SpinorField f = random_field(op, 60);
  const double dual = op.norm_dual_E(f);
  const double direct = op.norm(op.apply_absD_pow(f, -0.5), NormKind::L2);
  CHECK(dual == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("snapshot round trip preserves bits and metadata") {
  LatticeSpec lat{1.0, 1.1, 1.3, 2};
  DiracOperator op(lat, GridDims::default_for(2), 1.0);
  const SpinorField f = random_field(op, 70);

  const std::string path = (std::filesystem::temp_directory_path() / "dirac_snap_test.snap").string();
  save_snapshot(path, f, 1.0, 0.5, 0.25);

  SnapshotHeader hdr;
  const SpinorField g = load_snapshot(path, lat, &hdr);
  CHECK(hdr.K == 2);
  CHECK(hdr.m == 1.0);
  CHECK(hdr.a == 0.5);
  CHECK(hdr.eps == 0.25);
  REQUIRE(g.coeffs().size() == f.coeffs().size());
  for (std::size_t i = 0; i < f.coeffs().size(); ++i)
    CHECK(g.coeffs()[i] == f.coeffs()[i]);

  LatticeSpec wrongK = lat;
  wrongK.K = 3;
  CHECK_THROWS_AS(load_snapshot(path, wrongK), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("grid shift is exact on the truncated basis") {
  LatticeSpec lat{1.0, 1.0, 1.0, 2};
  const GridDims g = GridDims::default_for(2);
  DiracOperator op(lat, g, 1.0);
  const SpinorField f = random_field(op, 80);
  const SpinorField shifted = op.shift(f, 3, 0, 0);

  // Shifted field evaluated on the grid equals the cyclically permuted values.
  const auto grid_f = op.to_grid(f);
  const auto grid_s = op.to_grid(shifted);
  double worst = 0.0;
  for (int i1 = 0; i1 < g.n1; ++i1)
    for (int i2 = 0; i2 < g.n2; ++i2)
      for (int i3 = 0; i3 < g.n3; ++i3)
        for (int c = 0; c < 4; ++c) {
          const std::size_t src =
              ((static_cast<std::size_t>((i1 - 3 + g.n1) % g.n1) * g.n2 + i2) * g.n3 + i3) * 4 +
              c;
          const std::size_t dst =
              ((static_cast<std::size_t>(i1) * g.n2 + i2) * g.n3 + i3) * 4 + c;
          worst = std::max(worst, std::abs(grid_s[dst] - grid_f[src]));
        }
  CHECK(worst < 1e-12);
}
