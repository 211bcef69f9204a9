#include "latticekin/integrator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "latticekin/error.hpp"

namespace latticekin {

void IntegratorConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::validation_error, what); };
  if (!(rel_tol > 0.0)) fail("rel_tol must be > 0");
  if (!(abs_tol > 0.0)) fail("abs_tol must be > 0");
  if (!(safety > 0.0 && safety < 1.0)) fail("safety factor must lie in (0, 1)");
  if (!(dt_min >= 0.0) || !(dt_max > 0.0) || dt_min > dt_max) fail("need 0 <= dt_min <= dt_max");
  if (dt_init > 0.0 && (dt_init < dt_min || dt_init > dt_max))
    fail("dt_init must lie in [dt_min, dt_max]");
}

StepWorkspace::StepWorkspace(std::size_t n) : stage_(n), trial_(n) {
  for (auto& k : k_) k.assign(n, 0.0);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kGrowthCap = 5.0;
constexpr double kShrinkCap = 0.1;
constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - 0.75 * kBeta;

// Occupations live in [0, 1]; the error is measured against the distance to
// the nearer bound, which is the relevant scale for both f ~ 0 and f ~ 1.
double scale(double y, double abs_tol, double rel_tol) {
  return abs_tol + rel_tol * std::min(std::abs(y), std::abs(1.0 - y));
}

}  // namespace

struct StepKernel {
  static StepResult step(std::vector<double>& y, double t, double dt, const RhsFunction& rhs,
                         const IntegratorConfig& cfg, StepWorkspace& ws) {
    const std::size_t n = y.size();
    auto& k = ws.k_;
    auto& s = ws.stage_;
    auto& out = ws.trial_;
    if (!ws.fsal_valid_) {
      rhs(y, k[0]);
      ws.fsal_valid_ = true;
    }
    StepResult result;
    for (;;) {
      // A trial below dt_min is fine (snapshot truncation); shrinking below it is not.
      if ((result.rejected > 0 && dt < cfg.dt_min) || !(t + dt > t))
        throw Error(ErrorCode::step_underflow,
                    fmt::format("step size {:.3g} underflow at t = {:.6g}", dt, t));
      for (std::size_t i = 0; i < n; ++i) s[i] = y[i] + dt * a21 * k[0][i];
      rhs(s, k[1]);
      for (std::size_t i = 0; i < n; ++i) s[i] = y[i] + dt * (a31 * k[0][i] + a32 * k[1][i]);
      rhs(s, k[2]);
      for (std::size_t i = 0; i < n; ++i)
        s[i] = y[i] + dt * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
      rhs(s, k[3]);
      for (std::size_t i = 0; i < n; ++i)
        s[i] = y[i] + dt * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
      rhs(s, k[4]);
      for (std::size_t i = 0; i < n; ++i)
        s[i] = y[i] + dt * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] +
                            a65 * k[4][i]);
      rhs(s, k[5]);
      for (std::size_t i = 0; i < n; ++i)
        out[i] = y[i] + dt * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i] +
                              b6 * k[5][i]);
      rhs(out, k[6]);

      double err = 0.0;
      bool in_range = true;
      for (std::size_t i = 0; i < n; ++i) {
        const double e = dt * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] +
                               e6 * k[5][i] + e7 * k[6][i]);
        const double sc = std::max(scale(y[i], cfg.abs_tol, cfg.rel_tol),
                                   scale(out[i], cfg.abs_tol, cfg.rel_tol));
        const double ratio = std::abs(e) / sc;
        if (!(ratio <= err)) err = ratio;  // also picks up NaN
        if (!(out[i] >= -cfg.abs_tol && out[i] <= 1.0 + cfg.abs_tol)) in_range = false;
      }
      if (!std::isfinite(err)) in_range = false;

      if (err <= 1.0 && in_range) {
        double factor = err == 0.0 ? kGrowthCap
                                   : cfg.safety * std::pow(err, -kAlpha) *
                                         std::pow(ws.previous_error_, kBeta);
        factor = std::clamp(factor, kShrinkCap, kGrowthCap);
        if (result.rejected > 0) factor = std::min(factor, 1.0);
        ws.previous_error_ = std::max(err, 1e-4);
        for (std::size_t i = 0; i < n; ++i) y[i] = std::clamp(out[i], 0.0, 1.0);
        // Clamping moves y by at most abs_tol, so the last stage derivative
        // is reused unless a value was actually changed.
        bool clamped = false;
        for (std::size_t i = 0; i < n && !clamped; ++i) clamped = y[i] != out[i];
        if (clamped)
          rhs(y, k[0]);
        else
          std::swap(k[0], k[6]);
        result.dt_used = dt;
        result.dt_next = std::min(dt * factor, cfg.dt_max);
        return result;
      }
      ++result.rejected;
      const double factor =
          in_range ? std::max(kShrinkCap, cfg.safety * std::pow(err, -kAlpha)) : 0.5;
      dt *= std::min(factor, 0.5);
    }
  }
};

StepResult step_adaptive(std::vector<double>& y, double t, double dt, const RhsFunction& rhs,
                         const IntegratorConfig& config, StepWorkspace& workspace) {
  return StepKernel::step(y, t, dt, rhs, config, workspace);
}

double initial_step(std::span<const double> y, const RhsFunction& rhs,
                    const IntegratorConfig& config, double horizon) {
  std::vector<double> f(y.size());
  rhs(y, f);
  double d1 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    d1 = std::max(d1, std::abs(f[i]) / scale(y[i], config.abs_tol, config.rel_tol));
  // Start with a step that changes y by about one tolerance unit; the
  // controller grows it quickly from there.
  double h = d1 > 0.0 ? 1.0 / d1 : horizon;
  h = std::min({h, horizon, config.dt_max});
  return std::max(h, config.dt_min);
}

EvolveStats evolve(std::vector<double>& y, double t0, double t_end,
                   std::span<const double> snapshot_times, const RhsFunction& rhs,
                   const IntegratorConfig& config, const EvolveCallbacks& callbacks) {
  config.validate();
  EvolveStats stats;
  if (!(t_end > t0)) return stats;
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    if (snapshot_times[i] < t0 || snapshot_times[i] > t_end)
      throw Error(ErrorCode::validation_error,
                  fmt::format("snapshot time {} outside [{}, {}]", snapshot_times[i], t0, t_end));
    if (i > 0 && snapshot_times[i] < snapshot_times[i - 1])
      throw Error(ErrorCode::validation_error, "snapshot times must be sorted");
  }

  StepWorkspace ws(y.size());
  double t = t0;
  std::size_t next = 0;
  auto emit_due = [&] {
    while (next < snapshot_times.size() && snapshot_times[next] <= t) {
      if (callbacks.on_snapshot) callbacks.on_snapshot(t, y);
      ++next;
    }
  };
  emit_due();

  double dt = config.dt_init > 0.0 ? config.dt_init : initial_step(y, rhs, config, t_end - t0);
  while (t < t_end) {
    const double target = next < snapshot_times.size() ? snapshot_times[next] : t_end;
    const double remaining = target - t;
    // Land exactly on the target instead of leaving a sliver step behind.
    const bool truncated = dt >= remaining * (1.0 - 1e-12);
    const double trial = truncated ? remaining : dt;
    const StepResult r = step_adaptive(y, t, trial, rhs, config, ws);
    stats.accepted += 1;
    stats.rejected += static_cast<std::size_t>(r.rejected);
    stats.last_dt = r.dt_used;
    t = (truncated && r.dt_used == trial) ? target : t + r.dt_used;
    // A step cut short by a snapshot says nothing about the attainable size.
    dt = (truncated && r.rejected == 0) ? std::max(dt, r.dt_next) : r.dt_next;
    if (callbacks.on_step) callbacks.on_step(t, y);
    emit_due();
  }
  return stats;
}

}  // namespace latticekin
