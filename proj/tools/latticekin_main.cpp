#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "latticekin/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-band collision kinetics on a square lattice"};
  app.require_subcommand(1);

  latticekin::CliOptions options;
  std::string out_dir;
  app.add_option("--threads", options.threads, "worker threads (default: LATTICEKIN_THREADS or 1)")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--out-dir", out_dir, "output directory, overrides out_dir in the config");
  app.add_option("--seed", options.seed, "reserved; the pipeline is deterministic");
  double budget_mib = static_cast<double>(options.memory_budget) / 1048576.0;
  app.add_option("--memory-budget", budget_mib, "scattering table budget in MiB")
      ->check(CLI::PositiveNumber);

  std::string config;
  auto* run = app.add_subcommand("run", "integrate a configured scenario");
  run->add_option("config", config, "configuration file")->required();
  auto* bands = app.add_subcommand("bands", "print the band structure as CSV");
  bands->add_option("config", config, "configuration file")->required();
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_option("config", config, "configuration file")->required();
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : latticekin::exit_failure;
  }
  if (!out_dir.empty()) options.out_dir = out_dir;
  options.memory_budget = static_cast<std::size_t>(budget_mib * 1048576.0);

  if (*run) return latticekin::cmd_run(config, options);
  if (*bands) return latticekin::cmd_bands(config, options);
  return latticekin::cmd_verify(config, options);
}
