#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cyclebench/schedule.hpp"
#include "cyclebench/trainer.hpp"

namespace cyclebench {

enum class CurveKind { standard, cyclic };

const char* to_string(CurveKind kind) noexcept;
CurveKind curve_kind_from_string(const std::string& text);

struct TradeoffPoint {
  double epochs = 0.0;
  double wall_clock_s = 0.0;  // mean over seeds
  double acc_mean = 0.0;
  double acc_std = 0.0;       // population convention
  std::int64_t n_seeds = 1;
  bool interpolated = false;

  bool operator==(const TradeoffPoint&) const = default;
};

struct TradeoffCurve {
  CurveKind kind = CurveKind::standard;
  std::string method_set = "baseline";
  std::string fingerprint;
  std::vector<TradeoffPoint> points;

  bool operator==(const TradeoffCurve&) const = default;
};

/// Checks the curve invariants (increasing epochs, accuracy bounds, ...).
std::vector<std::string> validate(const TradeoffCurve& curve);

struct StandardRun {
  double duration_epochs = 0.0;
  std::uint64_t seed = 0;
  MetricsLog log;
};

/// One point per duration from the final-epoch validation accuracy of each
/// run, aggregated over seeds. Every run must use a cosine_decay schedule.
TradeoffCurve standard_curve(std::span<const StandardRun> runs);

/// How a cycle's accuracy is read off the per-epoch log.
enum class PeakRule {
  window_max,  // best epoch inside the cycle window
  cycle_end,   // the epoch that closes the cycle
};

/// One point per cycle of a single warm-restart run.
TradeoffCurve cyclic_curve(const MetricsLog& log, const CyclePlan& plan, PeakRule rule = PeakRule::window_max);

/// Per-seed cyclic curves aggregated with aggregate_seeds().
TradeoffCurve cyclic_curve(std::span<const MetricsLog> logs, const CyclePlan& plan,
                           PeakRule rule = PeakRule::window_max);

/// Mean and population std of per-seed curves on an identical duration grid.
/// The result does not depend on input order.
TradeoffCurve aggregate_seeds(std::span<const TradeoffCurve> curves);

struct RelativePoint {
  double epochs = 0.0;
  double delta = 0.0;
  bool interpolated = false;
};

struct RelativeCurve {
  CurveKind kind = CurveKind::standard;
  std::string method_set;
  std::string baseline;
  std::vector<RelativePoint> points;
};

/// Baseline accuracy at `epochs`: exact when the grid holds the duration,
/// otherwise piecewise linear in log2(epochs) inside the grid range.
std::optional<double> interpolate_accuracy(const TradeoffCurve& curve, double epochs, bool* interpolated = nullptr);

/// curve - baseline at every curve duration the baseline covers without
/// extrapolation.
RelativeCurve relative_improvement(const TradeoffCurve& curve, const TradeoffCurve& baseline);

/// Total epochs of a duration sweep over the epochs of the single cyclic run
/// sampling the same points: (1 - r^n) / ((1 - r) r^(n-1)).
double speedup_ratio(double growth_factor, std::int64_t cycles);

struct WallClockReport {
  double sweep_total_s = 0.0;   // sum over durations of the seed-mean run time
  double cyclic_total_s = 0.0;  // seed-mean time of the cyclic run
  double measured_ratio = 0.0;
  double predicted_ratio = 0.0;
  double sweep_epochs = 0.0;
  double cyclic_epochs = 0.0;
  double epoch_ratio = 0.0;
};

WallClockReport wall_clock_totals(std::span<const StandardRun> standard_runs, std::span<const MetricsLog> cyclic_runs,
                                  const CyclePlan& plan, double growth_factor, std::int64_t cycles);

/// Mean of (cyclic - standard) over the standard curve's durations, using
/// log2 interpolation of the cyclic curve where the grids differ.
std::optional<double> mean_gap(const TradeoffCurve& cyclic, const TradeoffCurve& standard, std::size_t* count = nullptr);

}  // namespace cyclebench
