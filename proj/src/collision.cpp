#include "latticekin/collision.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <thread>

#include <fmt/format.h>

#include "latticekin/error.hpp"
#include "orbit.hpp"

namespace latticekin {

double delta_kernel(double energy_change, double sigma) {
  const double x = energy_change / sigma;
  return std::exp(-0.5 * x * x) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

DistributionState DistributionState::ground(int n) {
  DistributionState s(n);
  std::fill(s.minus().begin(), s.minus().end(), 1.0);
  return s;
}

ScatteringTable::ScatteringTable(int grid_size, ChannelSet set, double sigma,
                                 double cutoff_sigmas, std::vector<TableEntry> entries,
                                 std::vector<std::uint8_t> channels)
    : grid_size_(grid_size),
      set_(set),
      sigma_(sigma),
      cutoff_sigmas_(cutoff_sigmas),
      entries_(std::move(entries)),
      channels_(std::move(channels)) {}

std::vector<std::uint8_t> channel_codes(ChannelSet set) {
  switch (set) {
    case ChannelSet::ph_only:
      return {channels::particle_hole, channels::hole_particle};
    case ChannelSet::full:
      return {channels::particle_hole,     channels::hole_particle, channels::hole_hole,
              channels::particle_particle, channels::exchange,      channels::exchange_mirror};
    case ChannelSet::weak_coupling:
      return {0};
  }
  return {};
}

double broadening_sigma(const BandStructure& bands) {
  const ModelParams& params = bands.params();
  const double width =
      params.channels == ChannelSet::weak_coupling ? 2.0 * params.hopping : bands.bandwidth();
  return params.broadening * width / params.grid_size;
}

namespace {

struct ChannelBands {
  std::uint8_t code;
  Channel ch;
};

}  // namespace

namespace detail {

OrbitContext::OrbitContext(const BandStructure& b, double s, double cutoff_sigmas)
    : bands(b),
      sigma(s),
      cutoff(cutoff_sigmas * s),
      weak(b.params().channels == ChannelSet::weak_coupling),
      ph(b.params().channels == ChannelSet::ph_only),
      modes(static_cast<std::uint32_t>(b.mode_count())) {
  const double w = b.grid().weight();
  prefactor = 2.0 * std::numbers::pi * w * w;
}

std::optional<TableEntry> evaluate_orbit(const OrbitContext& ctx, std::uint8_t code,
                                         std::uint32_t k, std::uint32_t p, std::uint32_t q) {
  const BandStructure& bands = ctx.bands;
  const BrillouinGrid& grid = bands.grid();
  const double vq = bands.interaction(q);
  if (vq == 0.0) return std::nullopt;  // every kernel carries a factor V_q
  const std::uint32_t kq = grid.sub(k, q);
  const std::uint32_t pq = grid.add(p, q);
  const Channel ch = Channel::from_code(code);
  auto state = [&](Band b, std::uint32_t m) {
    return state_key(ctx.weak, b == Band::plus, m, ctx.modes);
  };
  const OrbitInfo orbit = classify(state(ch.d, k), state(ch.b, p), state(ch.c, kq), state(ch.a, pq));
  if (!orbit.representative) return std::nullopt;

  double de;
  double m;
  if (ctx.weak) {
    de = bands.hopping(pq) + bands.hopping(kq) - bands.hopping(k) - bands.hopping(p);
    if (std::abs(de) > ctx.cutoff) return std::nullopt;
    m = vq * (vq - bands.interaction(grid.sub(kq, p)));
  } else {
    de = bands.energy_change(ch.a, pq, ch.b, p, ch.c, kq, ch.d, k);
    if (std::abs(de) > ctx.cutoff) return std::nullopt;
    m = ctx.ph ? vq * vq : matrix_element_full(ch, {pq, p, kq, k}, bands);
  }
  if (m == 0.0) return std::nullopt;
  const double weight = ctx.prefactor * m * delta_kernel(de, ctx.sigma) * orbit.multiplicity;
  return TableEntry{k, p, kq, pq, weight};
}

}  // namespace detail

namespace {

// Enumerates stored orbits for k in [k_begin, k_end), calling sink(entry, code).
template <typename Sink>
void enumerate_orbits(const detail::OrbitContext& ctx, std::uint32_t k_begin,
                      std::uint32_t k_end, Sink&& sink) {
  const std::vector<std::uint8_t> codes = channel_codes(ctx.bands.params().channels);
  for (std::uint32_t k = k_begin; k < k_end; ++k)
    for (std::uint32_t p = 0; p < ctx.modes; ++p)
      for (std::uint32_t q = 0; q < ctx.modes; ++q)
        for (std::uint8_t code : codes)
          if (auto e = detail::evaluate_orbit(ctx, code, k, p, q)) sink(*e, code);
}

std::vector<std::uint32_t> split_range(std::uint32_t n, unsigned parts) {
  std::vector<std::uint32_t> bounds(parts + 1);
  for (unsigned i = 0; i <= parts; ++i)
    bounds[i] = static_cast<std::uint32_t>(static_cast<std::uint64_t>(n) * i / parts);
  return bounds;
}

template <typename Work>
void run_parallel(unsigned parts, Work&& work) {
  if (parts <= 1) {
    work(0u);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(parts);
  for (unsigned t = 0; t < parts; ++t) pool.emplace_back([&work, t] { work(t); });
  for (auto& th : pool) th.join();
}

}  // namespace

ScatteringTable build_scattering_table(const BandStructure& bands, double sigma,
                                       const TableOptions& options) {
  if (!(sigma > 0.0))
    throw Error(ErrorCode::validation_error, "energy broadening sigma must be > 0");
  const ModelParams& params = bands.params();
  const auto modes = static_cast<std::uint32_t>(bands.mode_count());
  const detail::OrbitContext ctx(bands, sigma, options.cutoff_sigmas);
  const unsigned parts = std::clamp(options.threads, 1u, modes);
  const auto bounds = split_range(modes, parts);

  // Counting pass so the budget check happens before any large allocation.
  std::vector<std::size_t> counts(parts, 0);
  run_parallel(parts, [&](unsigned t) {
    enumerate_orbits(ctx, bounds[t], bounds[t + 1],
                     [&](const TableEntry&, std::uint8_t) { ++counts[t]; });
  });
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  const std::size_t required = total * ScatteringTable::bytes_per_entry();
  if (required > options.memory_budget)
    throw Error(ErrorCode::table_too_large,
                fmt::format("scattering table needs {} entries ({:.1f} MiB) but the budget is "
                            "{:.1f} MiB",
                            total, required / 1048576.0, options.memory_budget / 1048576.0));

  std::vector<std::vector<TableEntry>> part_entries(parts);
  std::vector<std::vector<std::uint8_t>> part_codes(parts);
  run_parallel(parts, [&](unsigned t) {
    part_entries[t].reserve(counts[t]);
    part_codes[t].reserve(counts[t]);
    enumerate_orbits(ctx, bounds[t], bounds[t + 1],
                     [&](const TableEntry& e, std::uint8_t code) {
                       part_entries[t].push_back(e);
                       part_codes[t].push_back(code);
                     });
  });

  std::vector<TableEntry> entries;
  std::vector<std::uint8_t> codes;
  entries.reserve(total);
  codes.reserve(total);
  for (unsigned t = 0; t < parts; ++t) {
    entries.insert(entries.end(), part_entries[t].begin(), part_entries[t].end());
    codes.insert(codes.end(), part_codes[t].begin(), part_codes[t].end());
    std::vector<TableEntry>().swap(part_entries[t]);
  }
  return {params.grid_size, params.channels, sigma, options.cutoff_sigmas, std::move(entries),
          std::move(codes)};
}

ScatteringTable build_scattering_table(const BandStructure& bands, const TableOptions& options) {
  return build_scattering_table(bands, broadening_sigma(bands), options);
}

namespace {

struct Slots {
  std::size_t in1, in2, out1, out2;
};

std::array<Slots, 16> slot_offsets(std::size_t modes, bool single_band) {
  std::array<Slots, 16> table{};
  for (unsigned code = 0; code < 16; ++code) {
    const Channel ch = Channel::from_code(static_cast<std::uint8_t>(code));
    auto off = [&](Band b) { return single_band ? 0 : band_offset(b, modes); };
    table[code] = {off(ch.d), off(ch.b), off(ch.c), off(ch.a)};
  }
  return table;
}

void accumulate(std::span<const double> f, const ScatteringTable& table, std::size_t begin,
                std::size_t end, const std::array<Slots, 16>& slots, double* out) {
  const auto& entries = table.entries();
  for (std::size_t i = begin; i < end; ++i) {
    const TableEntry& e = entries[i];
    const Slots& s = slots[table.channel_code(i)];
    const std::size_t in1 = s.in1 + e.k;
    const std::size_t in2 = s.in2 + e.p;
    const std::size_t out1 = s.out1 + e.kq;
    const std::size_t out2 = s.out2 + e.pq;
    const double fi1 = f[in1], fi2 = f[in2], fo1 = f[out1], fo2 = f[out2];
    const double bracket =
        fi1 * fi2 * (1.0 - fo1) * (1.0 - fo2) - fo1 * fo2 * (1.0 - fi1) * (1.0 - fi2);
    const double flux = e.weight * bracket;
    out[in1] -= flux;
    out[in2] -= flux;
    out[out1] += flux;
    out[out2] += flux;
  }
}

void evaluate(std::span<const double> f, const ScatteringTable& table, std::span<double> rate,
              unsigned threads, bool single_band) {
  const auto slots = slot_offsets(table.mode_count(), single_band);
  std::fill(rate.begin(), rate.end(), 0.0);
  const std::size_t n = table.size();
  const unsigned parts = n == 0 ? 1u : static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, n));
  if (parts == 1) {
    accumulate(f, table, 0, n, slots, rate.data());
    return;
  }
  // Fixed partitioning and a fixed-order merge keep results bitwise stable
  // for a given thread count.
  std::vector<std::vector<double>> partial(parts, std::vector<double>(rate.size(), 0.0));
  run_parallel(parts, [&](unsigned t) {
    const std::size_t begin = n * t / parts;
    const std::size_t end = n * (t + 1) / parts;
    accumulate(f, table, begin, end, slots, partial[t].data());
  });
  for (unsigned t = 0; t < parts; ++t)
    for (std::size_t i = 0; i < rate.size(); ++i) rate[i] += partial[t][i];
}

}  // namespace

void collision_rhs(std::span<const double> occupations, const ScatteringTable& table,
                   std::span<double> rate, unsigned threads) {
  if (table.channel_set() == ChannelSet::weak_coupling)
    throw Error(ErrorCode::validation_error, "collision_rhs needs a two-band table");
  const std::size_t expected = 2 * table.mode_count();
  if (occupations.size() != expected || rate.size() != expected)
    throw Error(ErrorCode::validation_error,
                fmt::format("state size {} does not match the {}x{} table",
                            occupations.size(), table.grid_size(), table.grid_size()));
  evaluate(occupations, table, rate, threads, false);
}

void weak_coupling_rhs(std::span<const double> occupation, const ScatteringTable& table,
                       std::span<double> rate, unsigned threads) {
  if (table.channel_set() != ChannelSet::weak_coupling)
    throw Error(ErrorCode::validation_error, "weak_coupling_rhs needs a weak-coupling table");
  if (occupation.size() != table.mode_count() || rate.size() != table.mode_count())
    throw Error(ErrorCode::validation_error, "single-band state size does not match the table");
  evaluate(occupation, table, rate, threads, true);
}

namespace {

template <typename PerEntry>
void for_each_flux(std::span<const double> f, const ScatteringTable& table, PerEntry&& fn) {
  const bool single = table.channel_set() == ChannelSet::weak_coupling;
  const auto slots = slot_offsets(table.mode_count(), single);
  const auto& entries = table.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const TableEntry& e = entries[i];
    const Slots& s = slots[table.channel_code(i)];
    const double fi1 = f[s.in1 + e.k], fi2 = f[s.in2 + e.p];
    const double fo1 = f[s.out1 + e.kq], fo2 = f[s.out2 + e.pq];
    const double bracket =
        fi1 * fi2 * (1.0 - fo1) * (1.0 - fo2) - fo1 * fo2 * (1.0 - fi1) * (1.0 - fi2);
    fn(i, e.weight * bracket);
  }
}

}  // namespace

double collision_activity(std::span<const double> occupations, const ScatteringTable& table) {
  double total = 0.0;
  for_each_flux(occupations, table, [&](std::size_t, double flux) { total += std::abs(flux); });
  return total;
}

double energy_production(std::span<const double> occupations, const ScatteringTable& table,
                         const BandStructure& bands) {
  const bool weak = table.channel_set() == ChannelSet::weak_coupling;
  double total = 0.0;
  for_each_flux(occupations, table, [&](std::size_t i, double flux) {
    const TableEntry& e = table.entry(i);
    double de;
    if (weak) {
      de = bands.hopping(e.pq) + bands.hopping(e.kq) - bands.hopping(e.k) - bands.hopping(e.p);
    } else {
      const Channel ch = table.channel(i);
      de = bands.energy_change(ch.a, e.pq, ch.b, e.p, ch.c, e.kq, ch.d, e.k);
    }
    total += flux * de;
  });
  return total;
}

}  // namespace latticekin
