#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latticekin/collision.hpp"
#include "latticekin/scenarios.hpp"

namespace latticekin {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  bool informational = false;
};

/// Occupations drawn uniformly from [lo, hi] with a fixed-seed generator.
std::vector<double> random_occupations(std::size_t n, std::uint64_t seed, double lo = 0.0,
                                       double hi = 1.0);

/// max_i |a_i - b_i| / |b_i| (0/0 counts as 0).
double max_relative_difference(std::span<const double> a, std::span<const double> b);

/// f+_k = 1/(exp(beta (E+_k - mu_plus)) + 1), likewise for f- with mu_minus.
DistributionState fermi_dirac_state(const BandStructure& bands, double beta, double mu_plus,
                                    double mu_minus);

struct DetailedBalance {
  double residual = 0.0;  // max_k |df/dt|
  double bound = 0.0;     // rigorous C sigma for this state and table
};

/// Evaluates the collision rhs on a Fermi-Dirac state. The bound uses
/// |1 - exp(x)| <= |x| exp(|x|) with |dE| <= cutoff on every entry.
DetailedBalance detailed_balance(const DistributionState& state, const ScatteringTable& table,
                                 double beta);

/// The invariant suite behind `latticekin verify`. Small-grid checks use the
/// configured physics on 4x4 to 16x16 grids; the table-cache check runs at
/// the configured N when a cache path is set.
std::vector<CheckResult> run_verification(const RunConfig& config, unsigned threads);

}  // namespace latticekin
