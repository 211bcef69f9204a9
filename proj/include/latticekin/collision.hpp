#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "latticekin/lattice.hpp"
#include "latticekin/matrix_elements.hpp"
#include "latticekin/params.hpp"

namespace latticekin {

/// Normalized Gaussian exp(-dE^2 / 2 sigma^2) / (sigma sqrt(2 pi)).
double delta_kernel(double energy_change, double sigma);

/// Occupations of both bands over the grid, stored as one flat array
/// [f+ (row-major N x N) | f- (row-major N x N)], plus the current time in
/// units of J^2/V^3.
struct DistributionState {
  int grid_size = 0;
  std::vector<double> values;
  double time = 0.0;

  DistributionState() = default;
  explicit DistributionState(int n)
      : grid_size(n), values(2 * static_cast<std::size_t>(n) * n, 0.0) {}

  /// f+ = 0, f- = 1 everywhere.
  static DistributionState ground(int n);

  std::size_t mode_count() const { return static_cast<std::size_t>(grid_size) * grid_size; }
  std::span<double> plus() { return {values.data(), mode_count()}; }
  std::span<double> minus() { return {values.data() + mode_count(), mode_count()}; }
  std::span<const double> plus() const { return {values.data(), mode_count()}; }
  std::span<const double> minus() const { return {values.data() + mode_count(), mode_count()}; }
  std::span<double> band(Band b) { return b == Band::plus ? plus() : minus(); }
  std::span<const double> band(Band b) const { return b == Band::plus ? plus() : minus(); }
};

/// Offset of a band inside the flat occupation array.
inline std::size_t band_offset(Band b, std::size_t mode_count) {
  return b == Band::plus ? 0 : mode_count;
}

/// One collision orbit: (d, k) + (b, p) -> (c, k-q) + (a, p+q) together with
/// its time reverse and the relabelling that swaps the two partners. The
/// stored weight already contains 2 pi w^2 M G_sigma(dE) and the orbit
/// multiplicity correction.
struct TableEntry {
  std::uint32_t k = 0;
  std::uint32_t p = 0;
  std::uint32_t kq = 0;
  std::uint32_t pq = 0;
  double weight = 0.0;
};

struct TableOptions {
  double cutoff_sigmas = 6.0;
  std::size_t memory_budget = std::size_t{2} << 30;  // bytes
  unsigned threads = 1;
};

class ScatteringTable {
 public:
  ScatteringTable() = default;
  ScatteringTable(int grid_size, ChannelSet set, double sigma, double cutoff_sigmas,
                  std::vector<TableEntry> entries, std::vector<std::uint8_t> channels);

  int grid_size() const { return grid_size_; }
  std::size_t mode_count() const { return static_cast<std::size_t>(grid_size_) * grid_size_; }
  ChannelSet channel_set() const { return set_; }
  double sigma() const { return sigma_; }
  double cutoff() const { return cutoff_sigmas_ * sigma_; }
  double cutoff_sigmas() const { return cutoff_sigmas_; }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<TableEntry>& entries() const { return entries_; }
  const TableEntry& entry(std::size_t i) const { return entries_[i]; }
  Channel channel(std::size_t i) const { return Channel::from_code(channels_[i]); }
  std::uint8_t channel_code(std::size_t i) const { return channels_[i]; }

  static std::size_t bytes_per_entry() { return sizeof(TableEntry) + sizeof(std::uint8_t); }

 private:
  int grid_size_ = 0;
  ChannelSet set_ = ChannelSet::ph_only;
  double sigma_ = 0.0;
  double cutoff_sigmas_ = 6.0;
  std::vector<TableEntry> entries_;
  std::vector<std::uint8_t> channels_;
};

/// Channel codes enumerated for a channel set. weak_coupling uses a single
/// band and reports code 0.
std::vector<std::uint8_t> channel_codes(ChannelSet set);

/// Energy broadening sigma = eta W / N, where W is the width of the band the
/// kernel lives on (the quasiparticle band, or 2J for weak coupling).
double broadening_sigma(const BandStructure& bands);

/// Enumerates every admissible collision orbit with |dE| <= cutoff. Throws
/// Error(table_too_large) when the table would exceed options.memory_budget.
ScatteringTable build_scattering_table(const BandStructure& bands, double sigma,
                                       const TableOptions& options = {});
ScatteringTable build_scattering_table(const BandStructure& bands,
                                       const TableOptions& options = {});

/// df/dt for the two-band kernels (ph_only, full), in internal time units
/// (1/V). `occupations` and `rate` use the DistributionState layout. Pure in
/// (occupations, table); bitwise reproducible for a fixed thread count.
void collision_rhs(std::span<const double> occupations, const ScatteringTable& table,
                   std::span<double> rate, unsigned threads = 1);

/// df/dt for the single metallic band of the weak-coupling kernel.
void weak_coupling_rhs(std::span<const double> occupation, const ScatteringTable& table,
                       std::span<double> rate, unsigned threads = 1);

/// Sum over entries of |weight * B|: total collision activity, the scale of
/// the energy-drift bound.
double collision_activity(std::span<const double> occupations, const ScatteringTable& table);

/// Sum over entries of weight * B * dE, i.e. sum_k E dF/dt computed per
/// collision.
double energy_production(std::span<const double> occupations, const ScatteringTable& table,
                         const BandStructure& bands);

/// Binary cache file: "LKTB", u32 version, u32 N, u8 channel set, f64 sigma,
/// then {u32 k, u32 p, u32 q, u8 channel, f64 weight} records, little-endian.
void write_table(const std::filesystem::path& path, const ScatteringTable& table);
ScatteringTable read_table(const std::filesystem::path& path);

/// Structural checks of a loaded table against the run it is meant for:
/// grid size, channel set, sigma, index ranges, channel codes, canonical
/// ordering, and every weight recomputed. Throws Error(corrupt_file) on
/// mismatch. Missing entries are not detected; compare against a rebuild
/// with tables_identical for that.
void check_table_consistency(const ScatteringTable& table, const BandStructure& bands,
                             double sigma);

bool tables_identical(const ScatteringTable& a, const ScatteringTable& b);

}  // namespace latticekin
