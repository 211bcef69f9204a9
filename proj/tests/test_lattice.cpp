#include <doctest.h>

#include <cmath>
#include <numbers>

#include "latticekin/error.hpp"
#include "latticekin/lattice.hpp"

using namespace latticekin;

namespace {
constexpr double pi = std::numbers::pi;

ModelParams params_with(double j, int n = 16) {
  ModelParams p;
  p.hopping = j;
  p.interaction = 1.0;
  p.grid_size = n;
  return p;
}
}  // namespace

TEST_CASE("hopping and interaction dispersions") {
  const ModelParams p = params_with(1.0);
  CHECK(hopping_dispersion({0, 0}, p) == 1.0);
  CHECK(std::abs(hopping_dispersion({pi, 0}, p)) < 1e-16);
  CHECK(std::abs(hopping_dispersion({pi / 2, pi / 2}, p)) < 1e-16);
  CHECK(interaction_fourier({0, 0}, p) == 1.0);
  CHECK(interaction_fourier({pi, pi}, p) == -1.0);
  CHECK(std::abs(interaction_fourier({pi / 2, pi / 2}, p)) < 1e-16);
  CHECK(hopping_dispersion({0.3, -1.1}, p) == hopping_dispersion({-0.3, 1.1}, p));
}

TEST_CASE("band energies against extended-precision values") {
  const ModelParams p = params_with(1e-3);
  const BandPair diamond = band_energies({pi, 0}, p);
  CHECK(diamond.plus == 1.0);
  CHECK(std::abs(diamond.minus) < 1e-30);

  // 50-digit evaluation of (1 +/- sqrt(1 + 4e-6)) / 2.
  const BandPair centre = band_energies({0, 0}, p);
  CHECK(centre.plus == doctest::Approx(1.000000999999000002).epsilon(1e-15));
  CHECK(centre.minus == doctest::Approx(-9.99999000001999995e-7).epsilon(1e-12));
  CHECK(centre.plus + centre.minus == 1.0);
}

TEST_CASE("rotation matrix") {
  const ModelParams p = params_with(1e-3);
  const Rotation diamond = rotation_matrix({pi / 2, pi / 2}, p);
  CHECK(diamond.cos == doctest::Approx(1.0));
  CHECK(std::abs(diamond.sin) < 1e-12);
  // On the grid the diamond is exact.
  const BandStructure grid_bands(BrillouinGrid(8), p);
  CHECK(grid_bands.rotation(BrillouinGrid(8).index(6, 6)).sin == 0.0);
  CHECK(grid_bands.rotation(BrillouinGrid(8).index(6, 6)).cos == 1.0);

  const Rotation centre = rotation_matrix({0, 0}, p);
  CHECK(centre.sin == doctest::Approx(0.000999998500003874988).epsilon(1e-13));
  CHECK(centre.cos == doctest::Approx(0.999999500001374995688).epsilon(1e-15));

  const Rotation corner = rotation_matrix({pi, pi}, p);  // J_k < 0
  CHECK(corner.cos < 0.0);
  CHECK(corner.sin > 0.0);

  for (double kx : {0.0, 0.4, 1.3, 2.9, -2.2})
    for (double ky : {0.0, -0.7, 3.0}) {
      const Rotation r = rotation_matrix({kx, ky}, params_with(0.3));
      CHECK(r.cos * r.cos + r.sin * r.sin == doctest::Approx(1.0).epsilon(1e-15));
    }

  ModelParams half = p;
  half.filling_a = 0.5;
  half.filling_b = 0.5;
  CHECK_THROWS_AS(rotation_matrix({pi, 0}, half), Error);
  try {
    rotation_matrix({pi, 0}, half);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_bands);
  }
}

TEST_CASE("Eigenbasis rows diagonalize the mean-field Hamiltonian") {
  const ModelParams p = params_with(0.2);
  for (double kx : {0.0, 0.9, 2.5}) {
    const Momentum k{kx, 0.4};
    const double jk = hopping_dispersion(k, p);
    const BandPair e = band_energies(k, p);
    const Eigenbasis o(rotation_matrix(k, p));
    // H = [[V^A, J_k], [J_k, V^B]] in the (A, B) basis.
    const double h[2][2] = {{p.sublattice_energy_a(), jk}, {jk, p.sublattice_energy_b()}};
    for (Band b : {Band::plus, Band::minus}) {
      const double energy = b == Band::plus ? e.plus : e.minus;
      for (int row = 0; row < 2; ++row) {
        const double hv = h[row][0] * o(b, Sublattice::a) + h[row][1] * o(b, Sublattice::b);
        CHECK(hv == doctest::Approx(energy * o(b, static_cast<Sublattice>(row))).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("grid mode arithmetic wraps exactly") {
  const BrillouinGrid grid(8);
  CHECK(grid.mode_count() == 64);
  CHECK(grid.weight() == 1.0 / 64);
  CHECK(grid.momentum(grid.zero()).x == 0.0);
  CHECK(grid.momentum(0).x == -pi);
  for (std::uint32_t a = 0; a < 64; ++a) {
    CHECK(grid.add(a, grid.zero()) == a);
    CHECK(grid.sub(a, a) == grid.zero());
    CHECK(grid.add(a, grid.negate(a)) == grid.zero());
    for (std::uint32_t b = 0; b < 64; b += 5) {
      CHECK(grid.sub(grid.add(a, b), b) == a);
      // Momenta agree with the wrapped real sum.
      const Momentum s = grid.momentum(grid.add(a, b));
      const Momentum ka = grid.momentum(a), kb = grid.momentum(b);
      const double dx = std::remainder(ka.x + kb.x - s.x, 2 * pi);
      CHECK(std::abs(dx) < 1e-12);
      CHECK(s.x >= -pi);
      CHECK(s.x < pi);
    }
  }
}

TEST_CASE("cosine table symmetries are exact") {
  for (int n : {4, 6, 8, 16, 50}) {
    const BrillouinGrid grid(n);
    for (int i = 0; i < n; ++i) {
      const int neg = (n - i) % n;
      const int shifted = (i + n / 2) % n;
      CHECK(grid.cos_component(i) == grid.cos_component(neg));
      CHECK(grid.cos_component(i) == -grid.cos_component(shifted));
    }
    if (n % 4 == 0) CHECK(grid.cos_component(n / 4) == 0.0);
  }
  CHECK_THROWS_AS(BrillouinGrid(5), Error);
  CHECK_THROWS_AS(BrillouinGrid(2), Error);
}

TEST_CASE("band structure invariants over every grid mode") {
  for (int n : {8, 16, 50}) {
    const ModelParams p = params_with(1e-3, n);
    const BrillouinGrid grid(n);
    const BandStructure bands(grid, p);
    double min_plus = INFINITY, max_minus = -INFINITY;
    for (std::uint32_t m = 0; m < grid.mode_count(); ++m) {
      const double ep = bands.energy(Band::plus, m), em = bands.energy(Band::minus, m);
      CHECK(ep + em == 1.0);
      CHECK(ep >= em);
      min_plus = std::min(min_plus, ep);
      max_minus = std::max(max_minus, em);
      const Rotation& r = bands.rotation(m);
      CHECK(r.cos * r.cos + r.sin * r.sin == doctest::Approx(1.0).epsilon(1e-15));
      const int ix = grid.ix(m), iy = grid.iy(m);
      for (std::uint32_t image : {grid.negate(m), grid.index(iy, ix), grid.index(ix + n / 2, iy + n / 2)}) {
        CHECK(bands.energy(Band::plus, image) == ep);
        CHECK(bands.energy(Band::minus, image) == em);
      }
    }
    CHECK(min_plus - max_minus == 1.0);
    // W = (sqrt(1 + 4 J^2/V^2) - 1) V / 2, 50-digit value.
    CHECK(bands.bandwidth() == doctest::Approx(9.99999000001999995e-7).epsilon(1e-12));
    CHECK(std::abs(bands.bandwidth() / 1e-6 - 1.0) < 1e-3);
  }
}

TEST_CASE("energy change from the split representation") {
  const ModelParams p = params_with(1e-3);
  const BrillouinGrid grid(16);
  const BandStructure bands(grid, p);
  for (std::uint32_t k = 0; k < 256; k += 17)
    for (std::uint32_t q = 3; q < 256; q += 29) {
      const std::uint32_t p1 = (k * 7 + 11) % 256;
      const std::uint32_t kq = grid.sub(k, q), pq = grid.add(p1, q);
      const double split = bands.energy_change(Band::minus, pq, Band::minus, p1, Band::plus, kq,
                                               Band::plus, k);
      const double naive = bands.energy(Band::minus, pq) - bands.energy(Band::minus, p1) +
                           bands.energy(Band::plus, kq) - bands.energy(Band::plus, k);
      CHECK(std::abs(split - naive) < 1e-15);
      // Time reversal flips the sign.
      CHECK(std::abs(bands.energy_change(Band::minus, p1, Band::minus, pq, Band::plus, k,
                                         Band::plus, kq) +
                     split) <= 1e-20);
    }
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  auto rejects = [](ModelParams q) {
    try {
      q.validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::validation_error;
    }
    return false;
  };
  ModelParams q = p;
  q.grid_size = 3;
  CHECK(rejects(q));
  q = p;
  q.hopping = 0.0;
  CHECK(rejects(q));
  q = p;
  q.filling_a = 0.3;
  CHECK(rejects(q));
  q = p;
  q.hopping = 0.5;
  CHECK(rejects(q));  // ph_only needs J << V
  q.channels = ChannelSet::full;
  CHECK_NOTHROW(q.validate());
  q.channels = ChannelSet::weak_coupling;
  CHECK_NOTHROW(q.validate());
  q = p;
  q.broadening = -1;
  CHECK(rejects(q));
}
