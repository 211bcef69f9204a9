#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "latticekin/collision.hpp"
#include "latticekin/diagnostics.hpp"
#include "latticekin/scenarios.hpp"

namespace latticekin {

/// Exit statuses of the command-line tool.
enum ExitStatus : int { exit_ok = 0, exit_failure = 1, exit_step_underflow = 2 };

struct CliOptions {
  unsigned threads = 0;  // 0: LATTICEKIN_THREADS, else 1
  std::optional<std::string> out_dir;
  std::uint64_t seed = 0;  // reserved
  std::size_t memory_budget = std::size_t{2} << 30;
};

unsigned resolve_threads(unsigned requested);

/// Comma-separated diagnostics table, one row per snapshot.
std::string csv_header();
std::string csv_row(const DiagnosticsRecord& record);

/// Builds the table for `bands`, or loads it from config.table_cache when
/// that file exists and passes check_table_consistency (a cache that fails
/// the check is rebuilt and rewritten). Messages go to stderr.
ScatteringTable obtain_table(const BandStructure& bands, const RunConfig& config,
                             const TableOptions& options);

struct RunSummary {
  std::vector<DiagnosticsRecord> records;
  DistributionState final_state;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  double min_h_increment = 0.0;   // over accepted steps
  double energy_drift = 0.0;      // |E(t_end) - E(0)|
  double energy_drift_bound = 0.0;  // sigma * integral of collision activity
  double population_drift = 0.0;    // max |N(t) - N(0)| over both bands
};

/// Runs a configured simulation in memory. Writes nothing; on_snapshot
/// receives each snapshot state (time in J^2/V^3) and its diagnostics.
RunSummary simulate(const RunConfig& config, const ScatteringTable& table,
                    const BandStructure& bands, unsigned threads,
                    const std::function<void(const DistributionState&,
                                             const DiagnosticsRecord&)>& on_snapshot = {});

int cmd_run(const std::string& config_path, const CliOptions& options);
int cmd_bands(const std::string& config_path, const CliOptions& options);
int cmd_verify(const std::string& config_path, const CliOptions& options);

}  // namespace latticekin
