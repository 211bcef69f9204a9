#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "latticekin/collision.hpp"
#include "latticekin/integrator.hpp"
#include "latticekin/lattice.hpp"
#include "latticekin/params.hpp"

namespace latticekin {

enum class ScenarioKind { ground, symmetric, asymmetric, custom };

std::string_view to_string(ScenarioKind kind);

/// Initial condition. Windows are fractions of the bandwidth W, closed on
/// both ends.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::ground;
  double delta_f = 1e-7;
  double w1 = 0.05;
  double w2 = 0.15;
  std::string custom_path;  // snapshot file for ScenarioKind::custom

  void validate() const;
};

/// Modes whose quasi-particle energy lies in the window:
/// (E+_k - min E+)/W in [w1, w2].
std::vector<std::uint32_t> low_energy_modes(const BandStructure& bands, double w1, double w2);

/// Modes whose quasi-hole energy lies in the window measured from the bottom
/// of the lower band: (E-_k - min E-)/W in [w1, w2]. For the default window
/// these sit around the zone centre and its (pi, pi) partner.
std::vector<std::uint32_t> deep_hole_modes(const BandStructure& bands, double w1, double w2);

/// f+ = delta_f on low_energy_modes, f- = 1 - delta_f on the same modes
/// (the mirror images across the gap), ground state elsewhere.
DistributionState init_symmetric(const BandStructure& bands, const ScenarioSpec& spec);

/// Quasi-particles on low_energy_modes, quasi-holes on deep_hole_modes.
/// When the two sets differ in size, the larger one gets the reduced
/// amplitude delta_f * m_small / m_large so that both bands carry the same
/// number of excitations; every amplitude stays <= delta_f.
DistributionState init_asymmetric(const BandStructure& bands, const ScenarioSpec& spec);

/// Dispatches on spec.kind; custom scenarios are read from a snapshot file.
DistributionState make_initial_state(const BandStructure& bands, const ScenarioSpec& spec);

struct RunConfig {
  ModelParams model;
  ScenarioSpec scenario;
  IntegratorConfig integrator;  // rel_tol and abs_tol come from the file
  double t_end = 100.0;         // units of J^2/V^3
  std::vector<double> snapshots{0.0, 100.0};
  std::string out_dir = "out";
  std::string table_cache;  // empty: build the table in memory only

  double j_over_v = 1e-3;  // as written in the file; model.hopping = j_over_v * V
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&);
};

/// Parses the `key = value` format. Unknown or repeated keys and malformed
/// values throw Error(parse_error) with line and column; violated invariants
/// throw Error(validation_error).
RunConfig load_config(std::string_view text);
RunConfig load_config_file(const std::string& path);

/// Writes every key explicitly; load_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

}  // namespace latticekin
