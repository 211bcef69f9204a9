#include "latticekin/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "latticekin/error.hpp"
#include "orbit.hpp"

namespace latticekin {

namespace {

double entropy(double f) {
  double s = 0.0;
  if (f > 0.0) s -= f * std::log(f);
  if (f < 1.0) s -= (1.0 - f) * std::log1p(-f);
  return s;
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double h_functional(const DistributionState& state) {
  double h = 0.0;
  for (double f : state.values) h += entropy(f);
  return h / static_cast<double>(state.mode_count());
}

double total_energy(const DistributionState& state, const BandStructure& bands) {
  const std::size_t n = state.mode_count();
  const double w = 1.0 / static_cast<double>(n);
  auto fp = state.plus();
  auto fm = state.minus();
  if (bands.params().channels == ChannelSet::weak_coupling) {
    double e = 0.0;
    for (std::uint32_t k = 0; k < n; ++k) e += bands.hopping(k) * fp[k];
    return e * w;
  }
  // Split form: the O(V) offsets multiply the band populations, the
  // k-dependent part is summed separately.
  double np = 0.0, nm = 0.0, disp = 0.0;
  for (std::uint32_t k = 0; k < n; ++k) {
    np += fp[k];
    nm += fm[k];
    disp += bands.dispersion(k) * (fp[k] - fm[k]);
  }
  return w * (bands.base(Band::plus) * np + bands.base(Band::minus) * nm + disp);
}

BandPair band_populations(const DistributionState& state) {
  return {mean(state.plus()), mean(state.minus())};
}

Momentum crystal_momentum(const DistributionState& state) {
  const BrillouinGrid grid(state.grid_size);
  const int n = state.grid_size;
  auto component = [&](int i) { return grid.offset(i) == -n / 2 ? 0.0 : grid.component(i); };
  double px = 0.0, py = 0.0;
  for (Band b : {Band::plus, Band::minus}) {
    auto f = state.band(b);
    for (std::uint32_t m = 0; m < f.size(); ++m) {
      px += component(grid.ix(m)) * f[m];
      py += component(grid.iy(m)) * f[m];
    }
  }
  const double w = grid.weight();
  auto wrap = [](double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    x = std::fmod(x + std::numbers::pi, two_pi);
    if (x < 0.0) x += two_pi;
    return x - std::numbers::pi;
  };
  return {wrap(px * w), wrap(py * w)};
}

FermiDiracFit fit_fermi_dirac(std::span<const double> f, std::span<const double> energy,
                              double saturation_threshold) {
  if (f.size() != energy.size())
    throw Error(ErrorCode::validation_error, "occupation and energy arrays differ in length");
  std::vector<double> xs, ys, fs;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] > saturation_threshold && 1.0 - f[i] > saturation_threshold)) continue;
    xs.push_back(energy[i]);
    ys.push_back(std::log(f[i]) - std::log1p(-f[i]));
    fs.push_back(f[i]);
  }
  if (xs.size() < 3)
    throw Error(ErrorCode::insufficient_data,
                fmt::format("Fermi-Dirac fit needs 3 unsaturated modes, found {}", xs.size()));

  FermiDiracFit fit;
  fit.modes = xs.size();
  const double x_mean = mean(xs);
  const double y_mean = mean(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
    sxy += (xs[i] - x_mean) * (ys[i] - y_mean);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.beta = -slope;
  if (fit.beta == 0.0) {
    fit.degenerate = true;
    fit.mu = x_mean;
  } else {
    fit.mu = x_mean + y_mean / fit.beta;
  }
  double sq = 0.0;
  const auto [lo, hi] = std::minmax_element(fs.begin(), fs.end());
  fit.occupancy_range = *hi - *lo;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double logit = y_mean + slope * (xs[i] - x_mean);
    const double model = 1.0 / (1.0 + std::exp(-logit));
    sq += (model - fs[i]) * (model - fs[i]);
  }
  fit.residual = std::sqrt(sq / static_cast<double>(xs.size()));
  return fit;
}

double particle_hole_distance(const DistributionState& state) {
  auto fp = state.plus();
  auto fm = state.minus();
  double s = 0.0;
  for (std::size_t k = 0; k < fp.size(); ++k) {
    const double d = fp[k] - (1.0 - fm[k]);
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(fp.size()));
}

double backreaction_rate(const DistributionState& state, const ScatteringTable& table,
                         const BandStructure& bands) {
  if (table.channel_set() == ChannelSet::weak_coupling) return 0.0;
  const auto modes = static_cast<std::uint32_t>(bands.mode_count());
  const double w = bands.grid().weight();
  const std::span<const double> f(state.values);
  auto occ = [&](Band b, std::uint32_t m) { return f[band_offset(b, modes) + m]; };
  auto key = [&](Band b, std::uint32_t m) {
    return detail::state_key(false, b == Band::plus, m, modes);
  };

  struct Member {
    Channel ch;
    MomentumQuad quad;
  };
  double sum = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const TableEntry& e = table.entry(i);
    const Channel c = table.channel(i);
    // The orbit: as stored, partners swapped, time reversed, and both.
    const std::array<Member, 4> members{
        Member{c, {e.pq, e.p, e.kq, e.k}},
        Member{{c.c, c.d, c.a, c.b}, {e.kq, e.k, e.pq, e.p}},
        Member{{c.b, c.a, c.d, c.c}, {e.p, e.pq, e.k, e.kq}},
        Member{{c.d, c.c, c.b, c.a}, {e.k, e.kq, e.p, e.pq}}};
    std::array<std::array<std::uint32_t, 4>, 4> seen{};
    for (std::size_t j = 0; j < members.size(); ++j) {
      const auto& [ch, m] = members[j];
      seen[j] = {key(ch.d, m.k), key(ch.b, m.p), key(ch.c, m.kq), key(ch.a, m.pq)};
      if (std::find(seen.begin(), seen.begin() + j, seen[j]) != seen.begin() + j) continue;
      const double de = bands.energy_change(ch.a, m.pq, ch.b, m.p, ch.c, m.kq, ch.d, m.k);
      const double fi1 = occ(ch.d, m.k), fi2 = occ(ch.b, m.p);
      const double fo1 = occ(ch.c, m.kq), fo2 = occ(ch.a, m.pq);
      const double bracket =
          fi1 * fi2 * (1.0 - fo1) * (1.0 - fo2) - fo1 * fo2 * (1.0 - fi1) * (1.0 - fi2);
      if (bracket == 0.0) continue;
      sum += backreaction_weight(ch, m, bands) * delta_kernel(de, table.sigma()) * bracket;
    }
  }
  return -2.0 * std::numbers::pi * w * w * w * sum;
}

DiagnosticsRecord compute_diagnostics(const DistributionState& state, const BandStructure& bands,
                                      const ScatteringTable* table) {
  const double unit = bands.params().time_unit();
  DiagnosticsRecord r;
  r.t = state.time;
  r.h = h_functional(state);
  r.energy = total_energy(state, bands);
  const BandPair n = band_populations(state);
  r.n_plus = n.plus;
  r.n_minus = n.minus;
  r.momentum = crystal_momentum(state);
  r.distance = particle_hole_distance(state);

  const std::size_t modes = state.mode_count();
  std::vector<double> e_plus(modes), e_minus(modes);
  const bool weak = bands.params().channels == ChannelSet::weak_coupling;
  for (std::uint32_t k = 0; k < modes; ++k) {
    e_plus[k] = weak ? bands.hopping(k) : bands.dispersion(k);
    e_minus[k] = -bands.dispersion(k);
  }
  auto fit_beta = [](std::span<const double> f, std::span<const double> e, double& residual) {
    try {
      const FermiDiracFit fit = fit_fermi_dirac(f, e);
      residual = fit.residual;
      return fit.beta;
    } catch (const Error&) {
      residual = std::numeric_limits<double>::quiet_NaN();
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  r.beta_plus = fit_beta(state.plus(), e_plus, r.residual_plus);
  r.beta_minus = fit_beta(state.minus(), e_minus, r.residual_minus);
  r.dna_dt = table ? backreaction_rate(state, *table, bands) * unit : 0.0;
  return r;
}

}  // namespace latticekin
