#include "latticekin/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include <fmt/format.h>

#include "latticekin/diagnostics.hpp"
#include "latticekin/error.hpp"
#include "latticekin/integrator.hpp"
#include "latticekin/matrix_elements.hpp"
#include "latticekin/reference.hpp"

namespace latticekin {

std::vector<double> random_occupations(std::size_t n, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

double max_relative_difference(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (d == 0.0) continue;
    worst = std::max(worst, b[i] == 0.0 ? INFINITY : d / std::abs(b[i]));
  }
  return worst;
}

DistributionState fermi_dirac_state(const BandStructure& bands, double beta, double mu_plus,
                                    double mu_minus) {
  DistributionState s(bands.params().grid_size);
  auto fd = [beta](double x) {
    // x = E - mu; written to stay finite for large |beta x|.
    const double z = beta * x;
    return z > 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
  };
  for (std::uint32_t k = 0; k < bands.mode_count(); ++k) {
    s.plus()[k] = fd(bands.base(Band::plus) - mu_plus + bands.dispersion(k));
    s.minus()[k] = fd(bands.base(Band::minus) - mu_minus - bands.dispersion(k));
  }
  return s;
}

DetailedBalance detailed_balance(const DistributionState& state, const ScatteringTable& table,
                                 double beta) {
  DetailedBalance r;
  std::vector<double> rate(state.values.size());
  collision_rhs(state.values, table, rate);
  for (double x : rate) r.residual = std::max(r.residual, std::abs(x));

  const std::size_t modes = table.mode_count();
  std::vector<double> load(state.values.size(), 0.0);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const TableEntry& e = table.entry(i);
    const Channel c = table.channel(i);
    const std::size_t in1 = band_offset(c.d, modes) + e.k, in2 = band_offset(c.b, modes) + e.p;
    const std::size_t out1 = band_offset(c.c, modes) + e.kq,
                      out2 = band_offset(c.a, modes) + e.pq;
    const auto& f = state.values;
    const double forward = f[in1] * f[in2] * (1.0 - f[out1]) * (1.0 - f[out2]);
    const double backward = f[out1] * f[out2] * (1.0 - f[in1]) * (1.0 - f[in2]);
    const double term = std::abs(e.weight) * std::max(forward, backward);
    for (std::size_t slot : {in1, in2, out1, out2}) load[slot] += term;
  }
  const double x = std::abs(beta) * table.cutoff();
  const double c = std::abs(beta) * table.cutoff_sigmas() * std::exp(x) *
                   *std::max_element(load.begin(), load.end());
  r.bound = c * table.sigma();
  return r;
}

namespace {

ModelParams small(const ModelParams& base, int n, ChannelSet set) {
  ModelParams p = base;
  p.grid_size = n;
  p.channels = set;
  return p;
}

CheckResult check(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail), false};
}

CheckResult info(std::string name, std::string detail) {
  return {std::move(name), true, std::move(detail), true};
}

void band_checks(const ModelParams& params, std::vector<CheckResult>& out) {
  const BrillouinGrid grid(params.grid_size);
  const BandStructure bands(grid, params);
  double worst_sum = 0.0, min_plus = INFINITY, max_minus = -INFINITY;
  for (std::uint32_t k = 0; k < grid.mode_count(); ++k) {
    worst_sum = std::max(worst_sum, std::abs(bands.energy(Band::plus, k) +
                                             bands.energy(Band::minus, k) - params.interaction));
    min_plus = std::min(min_plus, bands.energy(Band::plus, k));
    max_minus = std::max(max_minus, bands.energy(Band::minus, k));
  }
  out.push_back(check("bands.sum_rule", worst_sum == 0.0,
                      fmt::format("max |E+ + E- - V| = {:.3g}", worst_sum)));
  const double gap = min_plus - max_minus;
  out.push_back(check("bands.gap", gap == params.gap(),
                      fmt::format("min E+ - max E- = {:.17g}, V(nB - nA) = {:.17g}", gap,
                                  params.gap())));
  const double expected = params.hopping * params.hopping / params.interaction;
  const double rel = std::abs(bands.bandwidth() / expected - 1.0);
  const double ratio = params.hopping / params.interaction;
  if (ratio <= 1e-2)
    out.push_back(check("bands.bandwidth", rel <= 1e-3,
                        fmt::format("W = {:.6g}, J^2/V = {:.6g}, rel. diff {:.2e}",
                                    bands.bandwidth(), expected, rel)));
  else
    out.push_back(info("bands.bandwidth", fmt::format("W = {:.6g} (J/V = {} too large for the "
                                                      "J^2/V estimate)",
                                                      bands.bandwidth(), ratio)));
}

void oracle_check(const ModelParams& base, ChannelSet set, int n, unsigned threads,
                  std::vector<CheckResult>& out) {
  const ModelParams params = small(base, n, set);
  const BrillouinGrid grid(n);
  const BandStructure bands(grid, params);
  const double sigma = broadening_sigma(bands);
  TableOptions options;
  options.threads = threads;
  const ScatteringTable table = build_scattering_table(bands, sigma, options);
  const reference::Model model(params);
  const bool weak = set == ChannelSet::weak_coupling;
  const std::size_t size = weak ? grid.mode_count() : 2 * grid.mode_count();
  const auto f = random_occupations(size, 1000 + static_cast<std::uint64_t>(n));
  std::vector<double> fast(size);
  std::vector<double> slow;
  if (weak) {
    weak_coupling_rhs(f, table, fast, threads);
    slow = reference::weak_rhs(model, f, sigma, table.cutoff());
  } else {
    collision_rhs(f, table, fast, threads);
    slow = reference::strong_rhs(model, f, sigma, table.cutoff());
  }
  const double rel = max_relative_difference(fast, slow);
  out.push_back(check(fmt::format("oracle.{}.N{}", to_string(set), n), rel <= 1e-12,
                      fmt::format("{} entries, max rel. diff {:.2e}", table.size(), rel)));
}

void conservation_checks(const ModelParams& base, unsigned threads,
                         std::vector<CheckResult>& out) {
  const ModelParams params = small(base, 8, base.channels == ChannelSet::weak_coupling
                                                ? ChannelSet::ph_only
                                                : base.channels);
  const BrillouinGrid grid(8);
  const BandStructure bands(grid, params);
  TableOptions options;
  options.threads = threads;
  const ScatteringTable table = build_scattering_table(bands, options);
  const auto f = random_occupations(2 * grid.mode_count(), 7);
  std::vector<double> rate(f.size());
  collision_rhs(f, table, rate, threads);
  const std::size_t m = grid.mode_count();
  double sp = 0.0, sm = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    sp += rate[k];
    sm += rate[m + k];
    scale += std::abs(rate[k]) + std::abs(rate[m + k]);
  }
  const double worst = std::max(std::abs(sp), std::abs(sm)) / scale;
  out.push_back(check("conservation.populations", worst <= 1e-13,
                      fmt::format("|sum df| / sum |df| = {:.2e}", worst)));

  std::size_t broken = 0;
  for (const TableEntry& e : table.entries()) {
    const int n = grid.size();
    const bool x = (grid.ix(e.k) + grid.ix(e.p) - grid.ix(e.kq) - grid.ix(e.pq)) % n == 0;
    const bool y = (grid.iy(e.k) + grid.iy(e.p) - grid.iy(e.kq) - grid.iy(e.pq)) % n == 0;
    if (!x || !y) ++broken;
  }
  out.push_back(check("conservation.momentum", broken == 0,
                      fmt::format("{} of {} entries violate k + p = (k-q) + (p+q) mod N", broken,
                                  table.size())));

  const double production = energy_production(f, table, bands);
  const double bound = table.sigma() * collision_activity(f, table);
  out.push_back(check("conservation.energy_bound", std::abs(production) <= bound,
                      fmt::format("|sum E df| = {:.3e}, sigma * activity = {:.3e}",
                                  std::abs(production), bound)));
}

void gauge_checks(const ModelParams& base, std::vector<CheckResult>& out) {
  const ModelParams params = small(base, 4, ChannelSet::full);
  const BrillouinGrid grid(4);
  const BandStructure bands(grid, params);
  const auto modes = static_cast<std::uint32_t>(grid.mode_count());
  const auto codes = channel_codes(ChannelSet::full);
  std::vector<double> m_ref, n_ref;
  auto evaluate = [&](const BandStructure& b, std::vector<double>& m, std::vector<double>& nw) {
    m.clear();
    nw.clear();
    for (std::uint32_t k = 0; k < modes; ++k)
      for (std::uint32_t p = 0; p < modes; ++p)
        for (std::uint32_t q = 0; q < modes; ++q)
          for (std::uint8_t code : codes) {
            const MomentumQuad quad = MomentumQuad::from_kpq(grid, k, p, q);
            m.push_back(matrix_element_full(Channel::from_code(code), quad, b));
            nw.push_back(backreaction_weight(Channel::from_code(code), quad, b));
          }
  };
  evaluate(bands, m_ref, n_ref);
  double worst_m = 0.0;
  std::size_t n_mismatch = 0;
  std::vector<double> m, nw;
  for (std::uint32_t flip = 0; flip < modes; ++flip) {
    for (Band band : {Band::plus, Band::minus}) {
      BandStructure flipped = bands;
      flipped.flip_eigenvector(flip, band);
      evaluate(flipped, m, nw);
      std::size_t i = 0;
      for (std::uint32_t k = 0; k < modes; ++k)
        for (std::uint32_t p = 0; p < modes; ++p)
          for (std::uint32_t q = 0; q < modes; ++q)
            for (std::size_t c = 0; c < codes.size(); ++c, ++i) {
              worst_m = std::max(worst_m, std::abs(m[i] - m_ref[i]));
              if (k != flip && nw[i] != n_ref[i]) ++n_mismatch;
            }
    }
  }
  out.push_back(check("gauge.matrix_element", worst_m == 0.0,
                      fmt::format("{} eigenvector flips, max |dM| = {:.2e}", 2 * modes, worst_m)));
  out.push_back(check("gauge.backreaction_weight", n_mismatch == 0,
                      fmt::format("{} changed weights with k untouched", n_mismatch)));
}

void strong_limit_check(const ModelParams& base, std::vector<CheckResult>& out) {
  const double ratio = base.hopping / base.interaction;
  if (ratio > 1e-2) {
    out.push_back(info("strong_limit.matrix_elements",
                       fmt::format("skipped: J/V = {} is outside the strong limit", ratio)));
    return;
  }
  const ModelParams params = small(base, 16, ChannelSet::full);
  const BrillouinGrid grid(16);
  const BandStructure bands(grid, params);
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(grid.mode_count() - 1));
  const double v2 = params.interaction * params.interaction;
  double worst = 0.0;
  std::size_t compared = 0;
  for (std::uint8_t code : channel_codes(ChannelSet::full)) {
    for (int s = 0; s < 2000; ++s) {
      const MomentumQuad quad = MomentumQuad::from_kpq(grid, pick(rng), pick(rng), pick(rng));
      const Channel ch = Channel::from_code(code);
      const double full = matrix_element_full(ch, quad, bands);
      const double strong = matrix_element_strong(ch, quad, bands);
      if (std::abs(full) < v2 * 1e-12 && std::abs(strong) < v2 * 1e-12) continue;
      ++compared;
      worst = std::max(worst, std::abs(full - strong) / std::max(std::abs(full), v2 * 1e-12));
    }
  }
  out.push_back(check("strong_limit.matrix_elements", worst <= 1e-4 && compared >= 1000,
                      fmt::format("{} triples, max rel. error {:.2e}", compared, worst)));
}

ChannelSet two_band(const ModelParams& base) {
  if (base.channels == ChannelSet::full) return ChannelSet::full;
  return base.hopping / base.interaction <= 0.1 ? ChannelSet::ph_only : ChannelSet::full;
}

void backreaction_check(const ModelParams& base, std::vector<CheckResult>& out) {
  const ModelParams params = small(base, 6, two_band(base));
  const BrillouinGrid grid(6);
  const BandStructure bands(grid, params);
  const ScatteringTable table = build_scattering_table(bands);
  DistributionState state(6);
  state.values = random_occupations(state.values.size(), 99);
  const double fast = backreaction_rate(state, table, bands);
  const reference::Model model(params);
  const double slow =
      reference::backreaction_rate(model, state.values, table.sigma(), table.cutoff());
  const double rel = std::abs(fast - slow) / std::abs(slow);
  out.push_back(check(fmt::format("oracle.backreaction.{}.N6", to_string(params.channels)),
                      rel <= 1e-12,
                      fmt::format("dnA/dt = {:.6e}, reference {:.6e}, rel. diff {:.2e}", fast,
                                  slow, rel)));
}

void h_theorem_check(const ModelParams& base, unsigned threads, std::vector<CheckResult>& out) {
  const ModelParams params = small(base, 8, two_band(base));
  const BrillouinGrid grid(8);
  const BandStructure bands(grid, params);
  TableOptions options;
  options.threads = threads;
  const ScatteringTable table = build_scattering_table(bands, options);
  DistributionState state(8);
  state.values = random_occupations(state.values.size(), 5, 0.0, 1.0);
  const RhsFunction rhs = [&](std::span<const double> y, std::span<double> dy) {
    collision_rhs(y, table, dy, threads);
  };
  // Run for a few initial relaxation times.
  std::vector<double> rate(state.values.size());
  rhs(state.values, rate);
  double fastest = 0.0;
  for (std::size_t i = 0; i < rate.size(); ++i)
    fastest = std::max(fastest, std::abs(rate[i]) / std::max(1e-3, std::min(state.values[i], 1 - state.values[i])));
  const double t_end = 5.0 / fastest;
  DistributionState view(8);
  double previous = h_functional(state);
  const double h0 = previous;
  double worst = INFINITY;
  std::size_t steps = 0;
  const EvolveStats stats = evolve(
      state.values, 0.0, t_end, {}, rhs, IntegratorConfig{},
      {nullptr, [&](double, std::span<const double> y) {
         std::copy(y.begin(), y.end(), view.values.begin());
         const double h = h_functional(view);
         worst = std::min(worst, h - previous);
         previous = h;
         ++steps;
       }});
  (void)stats;
  out.push_back(check("h_theorem.random_state", worst >= -1e-10,
                      fmt::format("{} steps, H {:.6f} -> {:.6f}, min increment {:.2e}", steps,
                                  h0, previous, worst)));
}

void detailed_balance_check(const ModelParams& base, unsigned threads,
                            std::vector<CheckResult>& out) {
  const ModelParams params = small(base, 12, two_band(base));
  const BrillouinGrid grid(12);
  const BandStructure bands(grid, params);
  const double sigma = broadening_sigma(bands);
  TableOptions options;
  options.threads = threads;
  const ScatteringTable wide = build_scattering_table(bands, sigma, options);
  const ScatteringTable narrow = build_scattering_table(bands, sigma / 2, options);
  const double v = params.interaction;
  const double w = bands.bandwidth();
  for (double beta : {1e6 / v, -1e6 / v}) {
    // mu = V/2 sits in the gap; band-resolved mu probes partially filled bands.
    struct Case {
      const char* label;
      double mu_plus, mu_minus;
    };
    const Case cases[] = {{"mid_gap", v / 2, v / 2},
                          {"in_band", bands.base(Band::plus) + w / 2,
                           bands.base(Band::minus) - w / 2}};
    for (const Case& c : cases) {
      const DistributionState state = fermi_dirac_state(bands, beta, c.mu_plus, c.mu_minus);
      const DetailedBalance a = detailed_balance(state, wide, beta);
      const DetailedBalance b = detailed_balance(state, narrow, beta);
      const bool bounded = a.residual <= a.bound && b.residual <= b.bound;
      const double ratio = b.residual > 0.0 ? a.residual / b.residual : 0.0;
      const bool converges = a.residual == 0.0 ? b.residual == 0.0 : ratio >= 1.0 && ratio <= 4.0;
      out.push_back(check(fmt::format("detailed_balance.{}.beta{}", c.label, beta > 0 ? "+" : "-"),
                          bounded && converges,
                          fmt::format("residual {:.3e} (bound {:.3e}), halved sigma {:.3e}, "
                                      "ratio {:.3f}",
                                      a.residual, a.bound, b.residual, ratio)));
    }
  }
  // Informational: doubling sigma.
  const ScatteringTable doubled = build_scattering_table(bands, 2 * sigma, options);
  const double beta = 1e6 / v;
  const DistributionState state = fermi_dirac_state(bands, beta, bands.base(Band::plus) + w / 2,
                                                    bands.base(Band::minus) - w / 2);
  const double r1 = detailed_balance(state, wide, beta).residual;
  const double r2 = detailed_balance(state, doubled, beta).residual;
  out.push_back(info("detailed_balance.sigma_doubled",
                     fmt::format("residual {:.3e} -> {:.3e} (ratio {:.3f})", r1, r2,
                                 r1 > 0 ? r2 / r1 : 0.0)));
}

void cache_check(const RunConfig& config, unsigned threads, std::vector<CheckResult>& out) {
  if (config.table_cache.empty()) {
    out.push_back(info("table_cache", "no table_cache configured"));
    return;
  }
  if (!std::filesystem::exists(config.table_cache)) {
    out.push_back(info("table_cache", fmt::format("{} does not exist yet", config.table_cache)));
    return;
  }
  const BrillouinGrid grid(config.model.grid_size);
  const BandStructure bands(grid, config.model);
  try {
    const ScatteringTable cached = read_table(config.table_cache);
    check_table_consistency(cached, bands, broadening_sigma(bands));
    TableOptions options;
    options.threads = threads;
    const ScatteringTable rebuilt = build_scattering_table(bands, options);
    const bool same = tables_identical(cached, rebuilt);
    out.push_back(check("table_cache", same,
                        same ? fmt::format("{} entries match a fresh build", cached.size())
                             : std::string("cache differs from a fresh build")));
  } catch (const Error& e) {
    out.push_back(check("table_cache", false, e.what()));
  }
}

}  // namespace

std::vector<CheckResult> run_verification(const RunConfig& config, unsigned threads) {
  std::vector<CheckResult> out;
  const ModelParams& base = config.model;
  band_checks(base, out);
  const bool strong_ok = base.hopping / base.interaction <= 0.1;
  for (int n : {6, 8}) {
    if (strong_ok) oracle_check(base, ChannelSet::ph_only, n, threads, out);
    oracle_check(base, ChannelSet::weak_coupling, n, threads, out);
  }
  oracle_check(base, ChannelSet::full, 6, threads, out);
  backreaction_check(base, out);
  conservation_checks(base, threads, out);
  gauge_checks(base, out);
  strong_limit_check(base, out);
  h_theorem_check(base, threads, out);
  detailed_balance_check(base, threads, out);
  cache_check(config, threads, out);
  return out;
}

}  // namespace latticekin
