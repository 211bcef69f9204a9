#pragma once

#include <span>

#include "latticekin/collision.hpp"
#include "latticekin/lattice.hpp"

namespace latticekin {

/// H = -sum_a (1/N^2) sum_k [f ln f + (1 - f) ln(1 - f)], with 0 ln 0 = 0.
double h_functional(const DistributionState& state);

/// (1/N^2) sum_k (E+_k f+_k + E-_k f-_k). For weak-coupling runs the single
/// band sits in f+ with energies J_k.
double total_energy(const DistributionState& state, const BandStructure& bands);

BandPair band_populations(const DistributionState& state);

/// (1/N^2) sum over both bands of k f_k, wrapped into [-pi, pi)^2. A
/// component at -pi is its own inverse and counts as 0, so inversion-symmetric
/// states have P = 0 exactly.
Momentum crystal_momentum(const DistributionState& state);

struct FermiDiracFit {
  double beta = 0.0;
  double mu = 0.0;
  double residual = 0.0;  // rms of f_fit - f over the fitted modes
  double occupancy_range = 0.0;  // max f - min f over the fitted modes
  std::size_t modes = 0;
  bool degenerate = false;  // beta = 0, mu set to the mean energy
};

/// Least-squares fit of logit(f) = -beta (E - mu) over the modes with
/// saturation_threshold < f < 1 - saturation_threshold. Throws
/// Error(insufficient_data) with fewer than three such modes.
FermiDiracFit fit_fermi_dirac(std::span<const double> f, std::span<const double> energy,
                              double saturation_threshold = 1e-12);

/// sqrt((1/N^2) sum_k (f+_k - (1 - f-_k))^2).
double particle_hole_distance(const DistributionState& state);

/// dn^A/dt from the charge-density background weights N^{abcd}, summed over
/// every member of each stored collision orbit. Diagnostic only.
double backreaction_rate(const DistributionState& state, const ScatteringTable& table,
                         const BandStructure& bands);

struct DiagnosticsRecord {
  double t = 0.0;  // units of J^2/V^3
  double h = 0.0;
  double energy = 0.0;
  double n_plus = 0.0;
  double n_minus = 0.0;
  Momentum momentum;
  double beta_plus = 0.0;  // NaN when the fit has too few usable modes
  double beta_minus = 0.0;
  double residual_plus = 0.0;
  double residual_minus = 0.0;
  double distance = 0.0;
  double dna_dt = 0.0;  // per unit J^2/V^3
};

/// Fits use E+ - base(+) and E- - base(-), so beta is insensitive to the O(V)
/// offsets. `table` may be null, in which case dnA_dt is reported as 0.
DiagnosticsRecord compute_diagnostics(const DistributionState& state, const BandStructure& bands,
                                      const ScatteringTable* table);

}  // namespace latticekin
