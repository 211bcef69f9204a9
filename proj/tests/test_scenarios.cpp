#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>

#include "latticekin/diagnostics.hpp"
#include "latticekin/error.hpp"
#include "latticekin/scenarios.hpp"
#include "latticekin/snapshot.hpp"

using namespace latticekin;
namespace fs = std::filesystem;

namespace {

ModelParams params_for(int n) {
  ModelParams p;
  p.grid_size = n;
  return p;
}

ErrorCode code_of(const std::string& text) {
  try {
    load_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config was accepted: " << text);
  return ErrorCode::io_error;
}

std::string message_of(const std::string& text) {
  try {
    load_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("energy windows") {
  const BrillouinGrid grid(50);
  const BandStructure bands(grid, params_for(50));
  const auto low = low_energy_modes(bands, 0.05, 0.15);
  const auto deep = deep_hole_modes(bands, 0.05, 0.15);
  REQUIRE_FALSE(low.empty());
  REQUIRE_FALSE(deep.empty());
  const double w = bands.bandwidth();
  for (std::uint32_t k : low) {
    const double x = (bands.energy(Band::plus, k) - 1.0) / w;  // min E+ = V at the diamond
    CHECK(x >= 0.05 - 1e-9);
    CHECK(x <= 0.15 + 1e-9);
  }
  std::set<std::uint32_t> low_set(low.begin(), low.end());
  for (std::uint32_t k : deep) {
    CHECK(low_set.count(k) == 0);
    // Deep holes cluster around the zone centre and (pi, pi): |J_k| close to J.
    CHECK(std::abs(bands.hopping(k)) > 0.9e-3);
  }
  CHECK(low_energy_modes(bands, 0.0, 1.0).size() == grid.mode_count());
  CHECK(low_energy_modes(bands, 0.1, 0.1).empty());
}

TEST_CASE("symmetric initial state") {
  const BrillouinGrid grid(50);
  const BandStructure bands(grid, params_for(50));
  ScenarioSpec spec;
  spec.kind = ScenarioKind::symmetric;
  const DistributionState s = init_symmetric(bands, spec);
  const auto low = low_energy_modes(bands, spec.w1, spec.w2);
  for (std::uint32_t k : low) CHECK(s.plus()[k] == doctest::Approx(1e-7).epsilon(1e-8));
  for (std::size_t k = 0; k < s.mode_count(); ++k) CHECK(s.plus()[k] == 1.0 - s.minus()[k]);
  CHECK(particle_hole_distance(s) == 0.0);

  spec.delta_f = 0.0;
  CHECK(init_symmetric(bands, spec).values == DistributionState::ground(50).values);

  spec.delta_f = 1e-3;
  spec.w1 = spec.w2 = 0.1;
  CHECK_THROWS_AS(init_symmetric(bands, spec), Error);
  try {
    init_symmetric(bands, spec);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_region);
  }
  // A window narrower than the grid's energy spacing.
  const BrillouinGrid coarse(4);
  const BandStructure coarse_bands(coarse, params_for(4));
  spec.w1 = 0.3;
  spec.w2 = 0.4;
  try {
    init_symmetric(coarse_bands, spec);
    FAIL("expected empty_region");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_region);
  }
}

TEST_CASE("asymmetric initial state") {
  const BrillouinGrid grid(16);
  const BandStructure bands(grid, params_for(16));
  ScenarioSpec spec;
  spec.kind = ScenarioKind::asymmetric;
  spec.delta_f = 1e-2;
  const DistributionState s = init_asymmetric(bands, spec);
  std::size_t mp = 0, mh = 0;
  double np = 0.0, nh = 0.0;
  for (std::size_t k = 0; k < s.mode_count(); ++k) {
    const bool particle = s.plus()[k] > 0.0;
    const bool hole = s.minus()[k] < 1.0;
    CHECK_FALSE((particle && hole));
    CHECK(s.plus()[k] <= spec.delta_f);
    CHECK(1.0 - s.minus()[k] <= spec.delta_f * (1 + 1e-15));
    mp += particle;
    mh += hole;
    np += s.plus()[k];
    nh += 1.0 - s.minus()[k];
  }
  CHECK(mp > 0);
  CHECK(mh > 0);
  CHECK(np == doctest::Approx(nh).epsilon(1e-12));
  if (mp == mh)
    CHECK(particle_hole_distance(s) ==
          doctest::Approx(spec.delta_f * std::sqrt(2.0 * mp / 256)).epsilon(1e-12));
}

TEST_CASE("scenario validation") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::symmetric;
  CHECK_NOTHROW(spec.validate());
  for (double bad : {0.0, -1e-3, 0.6}) {
    spec.delta_f = bad;
    CHECK_THROWS_AS(spec.validate(), Error);
  }
  spec.delta_f = 1e-3;
  spec.w1 = 0.2;
  spec.w2 = 0.2;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.w2 = 1.5;
  CHECK_THROWS_AS(spec.validate(), Error);
  ScenarioSpec custom;
  custom.kind = ScenarioKind::custom;
  CHECK_THROWS_AS(custom.validate(), Error);
}

TEST_CASE("config defaults and round trip") {
  const RunConfig minimal = load_config("");
  CHECK(minimal.model.grid_size == 50);
  CHECK(minimal.model.hopping == 1e-3);
  CHECK(minimal.model.channels == ChannelSet::ph_only);
  CHECK(minimal.scenario.kind == ScenarioKind::ground);
  CHECK(minimal.snapshots == std::vector<double>{0.0, 100.0});

  const RunConfig c = load_config(R"(# symmetric run
J_over_V = 0.003   # hopping
V = 2
N = 12
eta = 1.5
channel_set = full
scenario = symmetric_low_energy
delta_f = 1e-4
w1 = 0.1
w2 = 0.3
rel_tol = 1e-9
abs_tol = 1e-13
t_end = 50
snapshots = 0, 0.5, 10, t_end
out_dir = "runs/a b"
table_cache = cache.lktb
)");
  CHECK(c.model.interaction == 2.0);
  CHECK(c.model.hopping == 0.006);
  CHECK(c.model.grid_size == 12);
  CHECK(c.model.channels == ChannelSet::full);
  CHECK(c.scenario.kind == ScenarioKind::symmetric);
  CHECK(c.snapshots == std::vector<double>{0.0, 0.5, 10.0, 50.0});
  CHECK(c.out_dir == "runs/a b");
  CHECK(c.table_cache == "cache.lktb");
  CHECK(load_config(serialize_config(c)) == c);
  CHECK(load_config(serialize_config(minimal)) == minimal);

  const RunConfig custom = load_config("scenario = \"custom:snaps/x.lksn\"\nN = 8\n");
  CHECK(custom.scenario.kind == ScenarioKind::custom);
  CHECK(custom.scenario.custom_path == "snaps/x.lksn");
  CHECK(load_config(serialize_config(custom)) == custom);
}

TEST_CASE("config errors carry positions") {
  CHECK(code_of("N = 16\nfoo = 1\n") == ErrorCode::parse_error);
  CHECK(message_of("N = 16\nfoo = 1\n").find("line 2, column 1") != std::string::npos);
  CHECK(message_of("N = 16\n  N = 8\n").find("line 2, column 3") != std::string::npos);
  CHECK(message_of("t_end = 1x\n").find("line 1, column 9") != std::string::npos);
  CHECK(message_of("t_end = 10\nsnapshots = 0, abc\n").find("line 2, column 16") !=
        std::string::npos);
  CHECK(code_of("N 16\n") == ErrorCode::parse_error);
  CHECK(code_of("N = 16.5\n") == ErrorCode::parse_error);
  CHECK(code_of("channel_set = sideways\n") == ErrorCode::parse_error);
  CHECK(code_of("scenario = spiral\n") == ErrorCode::parse_error);
  CHECK(code_of("out_dir = \"open\n") == ErrorCode::parse_error);

  CHECK(code_of("N = 7\n") == ErrorCode::validation_error);
  CHECK(message_of("N = 7\n").find("N") != std::string::npos);
  CHECK(code_of("J_over_V = 0.5\n") == ErrorCode::validation_error);
  CHECK(code_of("scenario = symmetric\ndelta_f = 0.7\n") == ErrorCode::validation_error);
  CHECK(code_of("scenario = symmetric\nw1 = 0.3\nw2 = 0.2\n") == ErrorCode::validation_error);
  CHECK(code_of("t_end = 10\nsnapshots = 0, 20\n") == ErrorCode::validation_error);
  CHECK(code_of("t_end = 10\nsnapshots = 5, 1\n") == ErrorCode::validation_error);
  CHECK(code_of("rel_tol = 0\n") == ErrorCode::validation_error);
}

TEST_CASE("custom scenario reads a snapshot") {
  const char* env = std::getenv("LATTICEKIN_TEST_TMP");
  const fs::path dir = (env ? fs::path(env) : fs::temp_directory_path()) / "scenario_tests";
  fs::create_directories(dir);
  DistributionState s = DistributionState::ground(8);
  s.plus()[3] = 0.25;
  s.time = 4.0;
  write_snapshot(dir / "init.lksn", s);
  const BrillouinGrid grid(8);
  const BandStructure bands(grid, params_for(8));
  ScenarioSpec spec;
  spec.kind = ScenarioKind::custom;
  spec.custom_path = (dir / "init.lksn").string();
  CHECK(make_initial_state(bands, spec).values == s.values);
  const BrillouinGrid other(6);
  const BandStructure other_bands(other, params_for(6));
  CHECK_THROWS_AS(make_initial_state(other_bands, spec), Error);
}
