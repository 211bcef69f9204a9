#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace latticekin {

/// Times are in the integrator's own unit (1/V for the kinetic runs).
struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double dt_init = 0.0;  // <= 0: estimated from the initial slope
  double dt_min = 0.0;
  double dt_max = std::numeric_limits<double>::infinity();
  double safety = 0.9;

  void validate() const;
};

using RhsFunction = std::function<void(std::span<const double> y, std::span<double> dydt)>;

/// Scratch storage and controller memory for one trajectory.
class StepWorkspace {
 public:
  explicit StepWorkspace(std::size_t n);

 private:
  friend struct StepKernel;
  std::vector<double> k_[7];
  std::vector<double> stage_, trial_;
  bool fsal_valid_ = false;
  double previous_error_ = 1e-4;
};

struct StepResult {
  double dt_used = 0.0;
  double dt_next = 0.0;
  int rejected = 0;
};

/// One accepted Dormand-Prince 5(4) step starting with a trial size `dt`.
/// Steps are rejected when the scaled error exceeds one or a component
/// leaves [-abs_tol, 1 + abs_tol]; accepted values are clamped into [0, 1].
/// `y` is only modified on success. Throws Error(step_underflow) when the
/// step size falls below dt_min or no longer advances t.
StepResult step_adaptive(std::vector<double>& y, double t, double dt, const RhsFunction& rhs,
                         const IntegratorConfig& config, StepWorkspace& workspace);

/// Initial step from the size of y and its slope.
double initial_step(std::span<const double> y, const RhsFunction& rhs,
                    const IntegratorConfig& config, double horizon);

struct EvolveCallbacks {
  std::function<void(double t, std::span<const double> y)> on_snapshot;
  std::function<void(double t, std::span<const double> y)> on_step;
};

struct EvolveStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double last_dt = 0.0;
};

/// Integrates from t0 to t_end, landing exactly on every snapshot time
/// (sorted, within [t0, t_end]). on_step runs after every accepted step.
EvolveStats evolve(std::vector<double>& y, double t0, double t_end,
                   std::span<const double> snapshot_times, const RhsFunction& rhs,
                   const IntegratorConfig& config, const EvolveCallbacks& callbacks = {});

}  // namespace latticekin
