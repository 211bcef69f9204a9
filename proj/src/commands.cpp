#include "latticekin/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "latticekin/error.hpp"
#include "latticekin/integrator.hpp"
#include "latticekin/snapshot.hpp"
#include "latticekin/verify.hpp"

namespace latticekin {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LATTICEKIN_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 1024) return static_cast<unsigned>(v);
  }
  return 1;
}

std::string csv_header() { return "t,H,E_total,N_plus,N_minus,Px,Py,beta_plus,beta_minus,D,dnA_dt"; }

std::string csv_row(const DiagnosticsRecord& r) {
  return fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
                     "{:.17g},{:.17g}",
                     r.t, r.h, r.energy, r.n_plus, r.n_minus, r.momentum.x, r.momentum.y,
                     r.beta_plus, r.beta_minus, r.distance, r.dna_dt);
}

ScatteringTable obtain_table(const BandStructure& bands, const RunConfig& config,
                             const TableOptions& options) {
  const double sigma = broadening_sigma(bands);
  const std::string& cache = config.table_cache;
  if (!cache.empty() && std::filesystem::exists(cache)) {
    try {
      ScatteringTable table = read_table(cache);
      check_table_consistency(table, bands, sigma);
      return table;
    } catch (const Error& e) {
      fmt::print(stderr, "table cache {} rejected ({}); rebuilding\n", cache, e.what());
    }
  }
  ScatteringTable table = build_scattering_table(bands, sigma, options);
  if (!cache.empty()) write_table(cache, table);
  return table;
}

RunSummary simulate(const RunConfig& config, const ScatteringTable& table,
                    const BandStructure& bands, unsigned threads,
                    const std::function<void(const DistributionState&,
                                             const DiagnosticsRecord&)>& on_snapshot) {
  const ModelParams& params = config.model;
  const double unit = params.time_unit();
  const bool weak = params.channels == ChannelSet::weak_coupling;
  const std::size_t modes = bands.mode_count();

  DistributionState state = make_initial_state(bands, config.scenario);
  state.time = 0.0;
  if (weak) std::fill(state.minus().begin(), state.minus().end(), 1.0);

  RhsFunction rhs;
  if (weak) {
    rhs = [&table, threads, modes](std::span<const double> y, std::span<double> dy) {
      weak_coupling_rhs(y.first(modes), table, dy.first(modes), threads);
      std::fill(dy.begin() + static_cast<std::ptrdiff_t>(modes), dy.end(), 0.0);
    };
  } else {
    rhs = [&table, threads](std::span<const double> y, std::span<double> dy) {
      collision_rhs(y, table, dy, threads);
    };
  }
  auto activity = [&](std::span<const double> y) {
    return weak ? collision_activity(y.first(modes), table) : collision_activity(y, table);
  };

  RunSummary summary;
  IntegratorConfig integrator = config.integrator;
  // Without a floor the controller can stall on steps too small to advance
  // the state; treat that as underflow.
  if (integrator.dt_min == 0.0) integrator.dt_min = 1e-12 * config.t_end * unit;
  std::vector<double> times;
  for (double t : config.snapshots) times.push_back(t * unit);

  const double e0 = total_energy(state, bands);
  const BandPair n0 = band_populations(state);
  double h_prev = h_functional(state);
  double act_prev = activity(state.values);
  double t_prev = 0.0;
  double activity_integral = 0.0;
  summary.min_h_increment = std::numeric_limits<double>::infinity();

  std::size_t snapshot_index = 0;
  DistributionState view(params.grid_size);
  auto emit = [&](double, std::span<const double> y) {
    std::copy(y.begin(), y.end(), view.values.begin());
    view.time = config.snapshots[snapshot_index++];
    const DiagnosticsRecord record = compute_diagnostics(view, bands, weak ? nullptr : &table);
    const BandPair n = band_populations(view);
    summary.population_drift = std::max({summary.population_drift, std::abs(n.plus - n0.plus),
                                         std::abs(n.minus - n0.minus)});
    summary.records.push_back(record);
    if (on_snapshot) on_snapshot(view, record);
  };
  auto step = [&](double t, std::span<const double> y) {
    std::copy(y.begin(), y.end(), view.values.begin());
    const double h = h_functional(view);
    summary.min_h_increment = std::min(summary.min_h_increment, h - h_prev);
    h_prev = h;
    const double act = activity(y);
    activity_integral += 0.5 * (act + act_prev) * (t - t_prev);
    act_prev = act;
    t_prev = t;
  };

  if (config.t_end > 0.0) {
    const EvolveStats stats = evolve(state.values, 0.0, config.t_end * unit, times, rhs,
                                     integrator, {emit, step});
    summary.accepted_steps = stats.accepted;
    summary.rejected_steps = stats.rejected;
  }
  if (summary.accepted_steps == 0) summary.min_h_increment = 0.0;
  state.time = config.t_end;
  summary.energy_drift = std::abs(total_energy(state, bands) - e0);
  summary.energy_drift_bound = table.sigma() * activity_integral * bands.grid().weight();
  summary.final_state = std::move(state);
  return summary;
}

namespace {

int report(const Error& e) {
  fmt::print(stderr, "error [{}]: {}\n", to_string(e.code()), e.what());
  return e.code() == ErrorCode::step_underflow ? exit_step_underflow : exit_failure;
}

RunConfig configure(const std::string& path, const CliOptions& options) {
  RunConfig config = load_config_file(path);
  if (options.out_dir) config.out_dir = *options.out_dir;
  return config;
}

}  // namespace

int cmd_run(const std::string& config_path, const CliOptions& options) {
  try {
    const RunConfig config = configure(config_path, options);
    const unsigned threads = resolve_threads(options.threads);
    const BrillouinGrid grid(config.model.grid_size);
    const BandStructure bands(grid, config.model);
    TableOptions table_options;
    table_options.threads = threads;
    table_options.memory_budget = options.memory_budget;
    const ScatteringTable table = obtain_table(bands, config, table_options);

    const std::filesystem::path out(config.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec)
      throw Error(ErrorCode::io_error, fmt::format("cannot create {}: {}", out.string(), ec.message()));
    std::ofstream csv(out / "diagnostics.csv", std::ios::trunc);
    if (!csv) throw Error(ErrorCode::io_error, "cannot write diagnostics.csv");
    csv << csv_header() << '\n';
    std::size_t index = 0;
    const RunSummary summary = simulate(
        config, table, bands, threads,
        [&](const DistributionState& s, const DiagnosticsRecord& r) {
          csv << csv_row(r) << '\n';
          csv.flush();
          write_snapshot(out / fmt::format("snapshot_{:04}.lksn", index++), s);
        });
    if (!csv) throw Error(ErrorCode::io_error, "write to diagnostics.csv failed");
    fmt::print("{} table entries, sigma = {:.6g}\n", table.size(), table.sigma());
    fmt::print("{} accepted / {} rejected steps\n", summary.accepted_steps,
               summary.rejected_steps);
    fmt::print("min H increment per step: {:.3e}\n", summary.min_h_increment);
    fmt::print("population drift: {:.3e}\n", summary.population_drift);
    fmt::print("energy drift {:.3e} (bound sigma * activity = {:.3e})\n", summary.energy_drift,
               summary.energy_drift_bound);
    return exit_ok;
  } catch (const Error& e) {
    return report(e);
  }
}

int cmd_bands(const std::string& config_path, const CliOptions& options) {
  try {
    const RunConfig config = configure(config_path, options);
    const BrillouinGrid grid(config.model.grid_size);
    const BandStructure bands(grid, config.model);
    std::string out = "k_x,k_y,E_plus,E_minus\n";
    for (std::uint32_t m = 0; m < grid.mode_count(); ++m) {
      const Momentum k = grid.momentum(m);
      out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", k.x, k.y,
                         bands.energy(Band::plus, m), bands.energy(Band::minus, m));
    }
    fmt::print("{}", out);
    return exit_ok;
  } catch (const Error& e) {
    return report(e);
  }
}

int cmd_verify(const std::string& config_path, const CliOptions& options) {
  try {
    const RunConfig config = configure(config_path, options);
    const auto results = run_verification(config, resolve_threads(options.threads));
    int failed = 0;
    for (const CheckResult& r : results) {
      const char* tag = r.informational ? "INFO" : (r.passed ? "PASS" : "FAIL");
      fmt::print("{} {}: {}\n", tag, r.name, r.detail);
      if (!r.informational && !r.passed) ++failed;
    }
    if (failed > 0) {
      fmt::print(stderr, "{} check(s) failed:", failed);
      for (const CheckResult& r : results)
        if (!r.informational && !r.passed) fmt::print(stderr, " {}", r.name);
      fmt::print(stderr, "\n");
      return exit_failure;
    }
    return exit_ok;
  } catch (const Error& e) {
    return report(e);
  }
}

}  // namespace latticekin
