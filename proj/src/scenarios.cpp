#include "latticekin/scenarios.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "latticekin/error.hpp"
#include "latticekin/snapshot.hpp"

namespace latticekin {

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::ground: return "ground";
    case ScenarioKind::symmetric: return "symmetric";
    case ScenarioKind::asymmetric: return "asymmetric";
    case ScenarioKind::custom: return "custom";
  }
  return "unknown";
}

void ScenarioSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::validation_error, what); };
  if (kind == ScenarioKind::ground) return;
  if (kind == ScenarioKind::custom) {
    if (custom_path.empty()) fail("custom scenario needs a snapshot path");
    return;
  }
  if (!(delta_f > 0.0 && delta_f <= 0.5))
    fail(fmt::format("delta_f must satisfy 0 < delta_f <= 0.5 (got {})", delta_f));
  if (!(w1 >= 0.0 && w1 < w2 && w2 <= 1.0))
    fail(fmt::format("energy window must satisfy 0 <= w1 < w2 <= 1 (got [{}, {}])", w1, w2));
}

namespace {

template <typename Fraction>
std::vector<std::uint32_t> window_modes(const BandStructure& bands, double w1, double w2,
                                        Fraction fraction) {
  std::vector<std::uint32_t> modes;
  if (!(w1 < w2)) return modes;
  const double width = bands.bandwidth();
  for (std::uint32_t k = 0; k < bands.mode_count(); ++k) {
    const double x = width > 0.0 ? fraction(k) / width : 0.0;
    if (x >= w1 && x <= w2) modes.push_back(k);
  }
  return modes;
}

void check_amplitude(double delta_f) {
  if (!(delta_f >= 0.0 && delta_f <= 0.5))
    throw Error(ErrorCode::validation_error,
                fmt::format("delta_f must lie in [0, 0.5] (got {})", delta_f));
}

[[noreturn]] void empty_window(const char* what, const ScenarioSpec& spec, int n) {
  throw Error(ErrorCode::empty_region,
              fmt::format("no {} modes in the window [{}, {}] on the {}x{} grid", what, spec.w1,
                          spec.w2, n, n));
}

}  // namespace

std::vector<std::uint32_t> low_energy_modes(const BandStructure& bands, double w1, double w2) {
  const double lo = bands.min_dispersion();
  return window_modes(bands, w1, w2, [&](std::uint32_t k) { return bands.dispersion(k) - lo; });
}

std::vector<std::uint32_t> deep_hole_modes(const BandStructure& bands, double w1, double w2) {
  const double hi = bands.max_dispersion();
  return window_modes(bands, w1, w2, [&](std::uint32_t k) { return hi - bands.dispersion(k); });
}

DistributionState init_symmetric(const BandStructure& bands, const ScenarioSpec& spec) {
  check_amplitude(spec.delta_f);
  const int n = bands.params().grid_size;
  DistributionState state = DistributionState::ground(n);
  const auto modes = low_energy_modes(bands, spec.w1, spec.w2);
  if (modes.empty()) empty_window("quasi-particle", spec, n);
  if (spec.delta_f == 0.0) return state;
  // f+ is taken as 1 - f- rather than delta_f so the mirror image is exact
  // in floating point.
  const double hole = 1.0 - spec.delta_f;
  for (std::uint32_t k : modes) {
    state.plus()[k] = 1.0 - hole;
    state.minus()[k] = hole;
  }
  return state;
}

DistributionState init_asymmetric(const BandStructure& bands, const ScenarioSpec& spec) {
  check_amplitude(spec.delta_f);
  const int n = bands.params().grid_size;
  DistributionState state = DistributionState::ground(n);
  const auto particles = low_energy_modes(bands, spec.w1, spec.w2);
  const auto holes = deep_hole_modes(bands, spec.w1, spec.w2);
  if (particles.empty()) empty_window("quasi-particle", spec, n);
  if (holes.empty()) empty_window("quasi-hole", spec, n);
  if (spec.delta_f == 0.0) return state;
  const double mp = static_cast<double>(particles.size());
  const double mh = static_cast<double>(holes.size());
  const double fp = mp > mh ? spec.delta_f * mh / mp : spec.delta_f;
  const double fh = mh > mp ? spec.delta_f * mp / mh : spec.delta_f;
  for (std::uint32_t k : particles) state.plus()[k] = fp;
  for (std::uint32_t k : holes) state.minus()[k] = 1.0 - fh;
  return state;
}

DistributionState make_initial_state(const BandStructure& bands, const ScenarioSpec& spec) {
  const int n = bands.params().grid_size;
  switch (spec.kind) {
    case ScenarioKind::ground: return DistributionState::ground(n);
    case ScenarioKind::symmetric: return init_symmetric(bands, spec);
    case ScenarioKind::asymmetric: return init_asymmetric(bands, spec);
    case ScenarioKind::custom: {
      DistributionState s = read_snapshot(spec.custom_path);
      if (s.grid_size != n)
        throw Error(ErrorCode::validation_error,
                    fmt::format("snapshot {} is {}x{}, the run uses N = {}", spec.custom_path,
                                s.grid_size, s.grid_size, n));
      return s;
    }
  }
  return DistributionState::ground(n);
}

}  // namespace latticekin
