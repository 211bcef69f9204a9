#pragma once

#include <string_view>

namespace latticekin {

enum class ChannelSet : unsigned char {
  ph_only = 0,        ///< strong-coupling particle-hole kernel only
  full = 1,           ///< all strong-coupling channels with the full matrix elements
  weak_coupling = 2,  ///< single metallic band, weak-interaction kernel
};

std::string_view to_string(ChannelSet set);

/// Physical definition of a run. Energies are in units where V is the
/// interaction strength (V = 1 unless configured otherwise).
struct ModelParams {
  double hopping = 1e-3;      ///< J
  double interaction = 1.0;   ///< V
  double filling_a = 0.0;     ///< n^A
  double filling_b = 1.0;     ///< n^B
  int grid_size = 50;         ///< N modes per dimension
  double broadening = 2.0;    ///< eta: sigma = eta * W / N
  ChannelSet channels = ChannelSet::ph_only;

  /// Mean-field energy of a fermion placed on sub-lattice A (its neighbours
  /// live on B).
  double sublattice_energy_a() const { return interaction * filling_b; }
  double sublattice_energy_b() const { return interaction * filling_a; }
  /// V^A - V^B.
  double gap() const { return interaction * (filling_b - filling_a); }

  /// J^2 / V^3, the time unit used for every reported time.
  double time_unit() const {
    return hopping * hopping / (interaction * interaction * interaction);
  }

  /// Throws Error(validation_error) naming the first violated invariant.
  void validate() const;
};

}  // namespace latticekin
