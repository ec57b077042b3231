#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cyclebench/compare.hpp"
#include "cyclebench/experiment.hpp"

namespace cyclebench {

enum class XAxis { wall_clock, epochs };

struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct PlotSeries {
  std::string label;
  TradeoffCurve curve;
};

struct TraceSeries {
  std::string label;
  std::vector<double> lr;
  Step steps_per_epoch = 1;
};

struct Bar {
  std::string label;
  double value = 0.0;
};

/// Accuracy span of the series padded by 10% of the data range on both
/// sides (0.01 when every point has the same accuracy).
AxisRange accuracy_range(std::span<const PlotSeries> series);

/// Standard curves are drawn solid, cyclic curves dashed; one polyline per
/// curve. The wall-clock axis starts at 0.
std::string tradeoff_svg(std::span<const PlotSeries> series, XAxis x, const std::string& title,
                         const std::string& fingerprint);
std::string schedule_svg(std::span<const TraceSeries> traces, const std::string& title, const std::string& fingerprint);
std::string relative_svg(std::span<const RelativeCurve> curves, const std::string& title,
                         const std::string& fingerprint);
std::string wallclock_svg(std::span<const Bar> bars, const std::string& title, const std::string& fingerprint);

/// tradeoff.svg, schedule.svg and (with both kinds) wallclock.svg for one
/// bundle. Returns the written paths.
std::vector<std::filesystem::path> plot_bundle(const ResultsBundle& bundle, const std::filesystem::path& dir,
                                               XAxis x = XAxis::wall_clock);

/// tradeoff.svg over every bundle plus relative.svg and wallclock.svg.
std::vector<std::filesystem::path> plot_report(const ComparisonReport& report, std::span<const ResultsBundle> bundles,
                                               const std::filesystem::path& dir, XAxis x = XAxis::wall_clock);

}  // namespace cyclebench
