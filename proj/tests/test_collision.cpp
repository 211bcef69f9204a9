#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "latticekin/collision.hpp"
#include "latticekin/diagnostics.hpp"
#include "latticekin/error.hpp"
#include "latticekin/reference.hpp"
#include "latticekin/scenarios.hpp"
#include "latticekin/verify.hpp"
#include "orbit.hpp"

using namespace latticekin;
namespace fs = std::filesystem;

namespace {

ModelParams params_for(int n, ChannelSet set, double j = 1e-3) {
  ModelParams p;
  p.hopping = j;
  p.grid_size = n;
  p.channels = set;
  return p;
}

struct Setup {
  BrillouinGrid grid;
  BandStructure bands;
  explicit Setup(const ModelParams& p) : grid(p.grid_size), bands(grid, p) {}
};

fs::path temp_dir() {
  const char* env = std::getenv("LATTICEKIN_TEST_TMP");
  fs::path dir = env ? fs::path(env) : fs::temp_directory_path();
  dir /= "collision_tests";
  fs::create_directories(dir);
  return dir;
}

std::vector<double> rhs_of(const std::vector<double>& f, const ScatteringTable& table,
                           unsigned threads = 1) {
  std::vector<double> rate(f.size());
  if (table.channel_set() == ChannelSet::weak_coupling)
    weak_coupling_rhs(f, table, rate, threads);
  else
    collision_rhs(f, table, rate, threads);
  return rate;
}

}  // namespace

TEST_CASE("delta kernel") {
  CHECK(delta_kernel(0.0, 1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  CHECK(delta_kernel(2.5, 2.5) ==
        doctest::Approx(std::exp(-0.5) / std::sqrt(2 * std::numbers::pi) / 2.5).epsilon(1e-15));
  CHECK(delta_kernel(-0.3, 0.7) == delta_kernel(0.3, 0.7));
  // Midpoint quadrature over +/- 12 sigma.
  const double sigma = 3e-7;
  const int steps = 24000;
  const double h = 24 * sigma / steps;
  double sum = 0.0;
  for (int i = 0; i < steps; ++i) sum += delta_kernel(-12 * sigma + (i + 0.5) * h, sigma) * h;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("broadening follows eta W / N") {
  const Setup s(params_for(16, ChannelSet::ph_only));
  CHECK(broadening_sigma(s.bands) == doctest::Approx(2.0 * s.bands.bandwidth() / 16).epsilon(1e-15));
  const Setup w(params_for(16, ChannelSet::weak_coupling, 0.5));
  CHECK(broadening_sigma(w.bands) == doctest::Approx(2.0 * 2 * 0.5 / 16).epsilon(1e-15));
}

TEST_CASE("orbit entries account for every admissible collision") {
  // The full set is left to the rhs oracle: whether a tiny M is exactly zero
  // depends on rounding, so its tuple count is not a stable target.
  for (ChannelSet set : {ChannelSet::ph_only, ChannelSet::weak_coupling}) {
    for (int n : {4, 6, 8}) {
      const ModelParams p = params_for(n, set, set == ChannelSet::ph_only ? 1e-3 : 0.05);
      const Setup s(p);
      // Broadband: sigma equal to the bandwidth.
      const double sigma = set == ChannelSet::weak_coupling ? 2 * p.hopping : s.bands.bandwidth();
      const ScatteringTable table = build_scattering_table(s.bands, sigma);
      const auto modes = static_cast<std::uint32_t>(s.grid.mode_count());
      const bool single = set == ChannelSet::weak_coupling;
      double covered = 0.0;
      for (std::size_t i = 0; i < table.size(); ++i) {
        const TableEntry& e = table.entry(i);
        const Channel ch = table.channel(i);
        auto key = [&](Band b, std::uint32_t m) {
          return detail::state_key(single, b == Band::plus, m, modes);
        };
        const detail::OrbitInfo info =
            detail::classify(key(ch.d, e.k), key(ch.b, e.p), key(ch.c, e.kq), key(ch.a, e.pq));
        REQUIRE(info.representative);
        covered += 4.0 * info.multiplicity;
      }
      const reference::Model model(p);
      INFO(to_string(set) << " N=" << n);
      CHECK(covered == static_cast<double>(
                           reference::admissible_collisions(model, 6.0 * sigma)));
      CHECK(table.size() > 0);
    }
  }
}

TEST_CASE("table structure") {
  const Setup s(params_for(8, ChannelSet::ph_only));
  const ScatteringTable table = build_scattering_table(s.bands);
  CHECK(table.sigma() == broadening_sigma(s.bands));
  CHECK(table.cutoff() == 6.0 * table.sigma());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const TableEntry& e = table.entry(i);
    const Channel ch = table.channel(i);
    const std::uint32_t q = s.grid.sub(e.k, e.kq);
    CHECK(s.bands.interaction(q) != 0.0);
    CHECK(s.grid.add(e.p, q) == e.pq);
    CHECK(std::isfinite(e.weight));
    const double de = s.bands.energy_change(ch.a, e.pq, ch.b, e.p, ch.c, e.kq, ch.d, e.k);
    CHECK(std::abs(de) <= table.cutoff());
  }
  check_table_consistency(table, s.bands, table.sigma());
}

TEST_CASE("vanishing broadening keeps only exactly degenerate collisions") {
  const Setup s(params_for(8, ChannelSet::ph_only));
  const ScatteringTable table = build_scattering_table(s.bands, 1e-300);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const TableEntry& e = table.entry(i);
    const Channel ch = table.channel(i);
    CHECK(s.bands.energy_change(ch.a, e.pq, ch.b, e.p, ch.c, e.kq, ch.d, e.k) == 0.0);
  }
  CHECK(table.size() < build_scattering_table(s.bands).size());
}

TEST_CASE("ground and uniform states are exact fixed points") {
  for (ChannelSet set : {ChannelSet::ph_only, ChannelSet::full}) {
    const Setup s(params_for(8, set));
    const ScatteringTable table = build_scattering_table(s.bands);
    const DistributionState ground = DistributionState::ground(8);
    for (double r : rhs_of(ground.values, table)) CHECK(r == 0.0);
    CHECK(collision_activity(ground.values, table) == 0.0);
    DistributionState uniform(8);
    std::fill(uniform.plus().begin(), uniform.plus().end(), 0.3);
    std::fill(uniform.minus().begin(), uniform.minus().end(), 0.8);
    for (double r : rhs_of(uniform.values, table)) CHECK(r == 0.0);
  }
  const Setup w(params_for(8, ChannelSet::weak_coupling, 0.3));
  const ScatteringTable table = build_scattering_table(w.bands);
  for (double r : rhs_of(std::vector<double>(64, 0.37), table)) CHECK(r == 0.0);
}

TEST_CASE("rhs matches the literal triple loop") {
  struct Case {
    ChannelSet set;
    int n;
    double j;
  };
  for (const Case c : {Case{ChannelSet::ph_only, 6, 1e-3}, Case{ChannelSet::ph_only, 8, 1e-3},
                       Case{ChannelSet::full, 6, 0.05}, Case{ChannelSet::weak_coupling, 6, 0.3},
                       Case{ChannelSet::weak_coupling, 8, 0.3}}) {
    ModelParams p = params_for(c.n, c.set, c.j);
    // With eta = 2 the weak-coupling cutoff 6 sigma = 24 J / N coincides with
    // exact energy differences on the grid, so rounding alone would decide
    // which boundary collisions each implementation keeps.
    if (c.set == ChannelSet::weak_coupling) p.broadening = 1.9;
    const Setup s(p);
    const ScatteringTable table = build_scattering_table(s.bands);
    const reference::Model model(p);
    const bool weak = c.set == ChannelSet::weak_coupling;
    const std::size_t size = (weak ? 1 : 2) * s.grid.mode_count();
    const std::vector<double> f = random_occupations(size, 1234 + c.n);
    const std::vector<double> fast = rhs_of(f, table);
    const std::vector<double> slow = weak ? reference::weak_rhs(model, f, table.sigma(), table.cutoff())
                                          : reference::strong_rhs(model, f, table.sigma(), table.cutoff());
    INFO(to_string(c.set) << " N=" << c.n);
    CHECK(max_relative_difference(fast, slow) <= 1e-12);
  }
}

TEST_CASE("populations, momentum and energy are conserved per evaluation") {
  for (ChannelSet set : {ChannelSet::ph_only, ChannelSet::full}) {
    const ModelParams p = params_for(8, set, set == ChannelSet::full ? 0.05 : 1e-3);
    const Setup s(p);
    const ScatteringTable table = build_scattering_table(s.bands);
    const std::vector<double> f = random_occupations(2 * 64, 99);
    const std::vector<double> rate = rhs_of(f, table);
    double scale = 0.0;
    for (double r : rate) scale = std::max(scale, std::abs(r));
    REQUIRE(scale > 0.0);
    if (set == ChannelSet::ph_only) {
      double np = 0.0, nm = 0.0;
      for (std::size_t m = 0; m < 64; ++m) {
        np += rate[m];
        nm += rate[64 + m];
      }
      CHECK(std::abs(np) <= 1e-13 * scale);
      CHECK(std::abs(nm) <= 1e-13 * scale);
    } else {
      double total = 0.0;
      for (double r : rate) total += r;
      CHECK(std::abs(total) <= 1e-13 * scale);
    }
    // Crystal momentum in integer units: every entry moves +q and -q.
    for (std::size_t i = 0; i < table.size(); ++i) {
      const TableEntry& e = table.entry(i);
      for (auto comp : {&BrillouinGrid::ix, &BrillouinGrid::iy}) {
        const int before = (s.grid.*comp)(e.k) + (s.grid.*comp)(e.p);
        const int after = (s.grid.*comp)(e.kq) + (s.grid.*comp)(e.pq);
        CHECK((before - after) % 8 == 0);
      }
    }
    const double production = energy_production(f, table, s.bands);
    CHECK(std::abs(production) <= table.sigma() * collision_activity(f, table) * 6.0);
    double direct = 0.0;
    for (std::size_t m = 0; m < 64; ++m)
      direct += s.bands.energy(Band::plus, static_cast<std::uint32_t>(m)) * rate[m] +
                s.bands.energy(Band::minus, static_cast<std::uint32_t>(m)) * rate[64 + m];
    CHECK(std::abs(direct - production) <= 1e-10 * scale);
  }
}

TEST_CASE("rhs scales quadratically with the perturbation") {
  const Setup s(params_for(16, ChannelSet::ph_only));
  const ScatteringTable table = build_scattering_table(s.bands);
  ScenarioSpec spec;
  spec.kind = ScenarioKind::asymmetric;
  spec.delta_f = 1e-5;
  const std::vector<double> small = rhs_of(init_asymmetric(s.bands, spec).values, table);
  spec.delta_f = 1e-4;
  const std::vector<double> large = rhs_of(init_asymmetric(s.bands, spec).values, table);
  double peak = 0.0;
  for (double r : small) peak = std::max(peak, std::abs(r));
  REQUIRE(peak > 0.0);
  std::size_t counted = 0;
  for (std::size_t i = 0; i < small.size(); ++i) {
    if (std::abs(small[i]) < 1e-6 * peak) continue;
    ++counted;
    CHECK(large[i] / small[i] == doctest::Approx(100.0).epsilon(0.01));
  }
  CHECK(counted > 10);
}

TEST_CASE("thread count does not change the table or the rhs") {
  const Setup s(params_for(12, ChannelSet::ph_only));
  TableOptions one, three;
  three.threads = 3;
  const ScatteringTable a = build_scattering_table(s.bands, one);
  const ScatteringTable b = build_scattering_table(s.bands, three);
  CHECK(tables_identical(a, b));
  const std::vector<double> f = random_occupations(2 * 144, 7);
  CHECK(rhs_of(f, a, 3) == rhs_of(f, a, 3));
  CHECK(rhs_of(f, a, 1) == rhs_of(f, a, 1));
  CHECK(max_relative_difference(rhs_of(f, a, 3), rhs_of(f, a, 1)) <= 1e-12);
}

TEST_CASE("memory budget") {
  const Setup s(params_for(12, ChannelSet::ph_only));
  TableOptions tight;
  tight.memory_budget = 1024;
  try {
    build_scattering_table(s.bands, tight);
    FAIL("expected table_too_large");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::table_too_large);
    INFO(e.what());
    CHECK(std::string(e.what()).find("budget") != std::string::npos);
  }
}

TEST_CASE("table cache round trip and corruption") {
  const Setup s(params_for(8, ChannelSet::ph_only));
  const ScatteringTable table = build_scattering_table(s.bands);
  const fs::path path = temp_dir() / "t8.lktb";
  write_table(path, table);
  CHECK(fs::file_size(path) == 21 + 21 * table.size());
  const ScatteringTable loaded = read_table(path);
  CHECK(tables_identical(table, loaded));
  CHECK_NOTHROW(check_table_consistency(loaded, s.bands, table.sigma()));

  auto expect_corrupt = [](auto&& action) {
    try {
      action();
      return false;
    } catch (const Error& e) {
      return e.code() == ErrorCode::corrupt_file;
    }
  };
  // Different sigma or grid: the cache belongs to another run.
  CHECK(expect_corrupt([&] { check_table_consistency(loaded, s.bands, 2 * table.sigma()); }));
  const Setup other(params_for(6, ChannelSet::ph_only));
  CHECK(expect_corrupt([&] { check_table_consistency(loaded, other.bands, table.sigma()); }));

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write_bytes = [&](const std::string& b) {
    const fs::path bad = temp_dir() / "bad.lktb";
    std::ofstream(bad, std::ios::binary) << b;
    return bad;
  };
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK(expect_corrupt([&] { read_table(write_bytes(bad_magic)); }));
  CHECK(expect_corrupt([&] { read_table(write_bytes(bytes.substr(0, bytes.size() - 3))); }));
  // Flip a bit in the first weight: structurally valid, caught by the recomputation.
  std::string bad_weight = bytes;
  bad_weight[21 + 13 + 7] ^= 0x01;
  CHECK(expect_corrupt([&] {
    check_table_consistency(read_table(write_bytes(bad_weight)), s.bands, table.sigma());
  }));
  try {
    read_table(temp_dir() / "missing.lktb");
    FAIL("expected io_error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io_error);
  }
}
