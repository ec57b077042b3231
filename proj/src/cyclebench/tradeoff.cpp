#include "cyclebench/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cyclebench/error.hpp"

namespace cyclebench {

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

// Values are sorted first so the result is independent of input order.
Moments population_moments(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  Moments m;
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(sq / static_cast<double>(values.size()));
  return m;
}

double sorted_mean(std::vector<double> values) { return population_moments(std::move(values)).mean; }

}  // namespace

const char* to_string(CurveKind kind) noexcept { return kind == CurveKind::standard ? "standard" : "cyclic"; }

CurveKind curve_kind_from_string(const std::string& text) {
  if (text == "standard") return CurveKind::standard;
  if (text == "cyclic") return CurveKind::cyclic;
  throw Error(ErrorKind::format, "unknown curve kind '" + text + "'");
}

std::vector<std::string> validate(const TradeoffCurve& curve) {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    if (i > 0 && !(p.epochs > curve.points[i - 1].epochs)) issues.emplace_back("curve epochs not strictly increasing");
    if (!(p.acc_mean >= 0.0 && p.acc_mean <= 1.0)) issues.emplace_back("curve accuracy outside [0, 1]");
    if (!(p.acc_std >= 0.0)) issues.emplace_back("curve accuracy std negative");
    if (p.n_seeds < 1) issues.emplace_back("curve point with no seeds");
  }
  return issues;
}

TradeoffCurve standard_curve(std::span<const StandardRun> runs) {
  if (runs.empty()) throw Error(ErrorKind::empty_input, "no runs for a standard curve");
  std::set<std::pair<double, std::uint64_t>> seen;
  std::map<double, std::vector<const StandardRun*>> by_duration;
  const std::string& fingerprint = runs.front().log.fingerprint;
  for (const auto& run : runs) {
    if (run.log.schedule != "cosine_decay")
      throw Error(ErrorKind::inconsistent, "standard curves need cosine_decay runs, got '" + run.log.schedule + "'");
    if (run.log.fingerprint != fingerprint) throw Error(ErrorKind::inconsistent, "runs carry different fingerprints");
    if (!seen.emplace(run.duration_epochs, run.seed).second)
      throw Error(ErrorKind::duplicate, "duplicate run for duration " + std::to_string(run.duration_epochs) +
                                            " seed " + std::to_string(run.seed));
    if (run.log.epochs.empty() ||
        static_cast<double>(run.log.epochs.back().epoch) != run.duration_epochs)
      throw Error(ErrorKind::inconsistent, "run log does not cover its duration of " +
                                               std::to_string(run.duration_epochs) + " epochs");
    by_duration[run.duration_epochs].push_back(&run);
  }

  TradeoffCurve curve;
  curve.kind = CurveKind::standard;
  curve.fingerprint = fingerprint;
  for (const auto& [duration, group] : by_duration) {
    std::vector<double> acc, wall;
    for (const auto* run : group) {
      acc.push_back(run->log.epochs.back().val_acc);
      wall.push_back(run->log.epochs.back().wall_clock_s);
    }
    const Moments m = population_moments(acc);
    curve.points.push_back({duration, sorted_mean(wall), m.mean, m.std, static_cast<std::int64_t>(group.size()), false});
  }
  return curve;
}

TradeoffCurve cyclic_curve(const MetricsLog& log, const CyclePlan& plan, PeakRule rule) {
  if (log.schedule != "warm_restarts" && log.schedule != "sawtooth")
    throw Error(ErrorKind::inconsistent, "cyclic curves need a cyclic schedule, got '" + log.schedule + "'");
  if (plan.cycle_end_steps.empty() || plan.cycle_end_steps.size() != plan.cycle_end_epochs.size())
    throw Error(ErrorKind::inconsistent, "cycle plan is empty or malformed");
  if (log.epochs.empty() || log.epochs.back().step != plan.cycle_end_steps.back())
    throw Error(ErrorKind::inconsistent, "metrics log length does not match the cycle plan");

  TradeoffCurve curve;
  curve.kind = CurveKind::cyclic;
  curve.fingerprint = log.fingerprint;
  std::size_t e = 0;
  while (e < log.epochs.size() && log.epochs[e].step <= plan.first_cycle_start) ++e;
  for (std::size_t i = 0; i < plan.cycle_end_steps.size(); ++i) {
    const Step end = plan.cycle_end_steps[i];
    const std::size_t first = e;
    double best = -1.0;
    while (e < log.epochs.size() && log.epochs[e].step <= end) {
      best = std::max(best, log.epochs[e].val_acc);
      ++e;
    }
    if (e == first)
      throw Error(ErrorKind::inconsistent, "cycle " + std::to_string(i + 1) + " contains no evaluated epoch");
    const EpochRecord& closing = log.epochs[e - 1];
    const double acc = rule == PeakRule::window_max ? best : closing.val_acc;
    curve.points.push_back({plan.cycle_end_epochs[i], closing.wall_clock_s, acc, 0.0, 1, false});
  }
  return curve;
}

TradeoffCurve cyclic_curve(std::span<const MetricsLog> logs, const CyclePlan& plan, PeakRule rule) {
  std::vector<TradeoffCurve> per_seed;
  per_seed.reserve(logs.size());
  for (const auto& log : logs) per_seed.push_back(cyclic_curve(log, plan, rule));
  return aggregate_seeds(per_seed);
}

TradeoffCurve aggregate_seeds(std::span<const TradeoffCurve> curves) {
  if (curves.empty()) throw Error(ErrorKind::empty_input, "no curves to aggregate");
  const TradeoffCurve& first = curves.front();
  for (const auto& c : curves) {
    if (c.kind != first.kind) throw Error(ErrorKind::inconsistent, "cannot aggregate curves of different kinds");
    if (c.points.size() != first.points.size())
      throw Error(ErrorKind::inconsistent, "curves have different duration grids");
    for (std::size_t i = 0; i < c.points.size(); ++i)
      if (c.points[i].epochs != first.points[i].epochs)
        throw Error(ErrorKind::inconsistent, "curves have different duration grids");
  }
  TradeoffCurve out;
  out.kind = first.kind;
  out.method_set = first.method_set;
  out.fingerprint = first.fingerprint;
  for (std::size_t i = 0; i < first.points.size(); ++i) {
    std::vector<double> acc, wall;
    bool interpolated = false;
    for (const auto& c : curves) {
      acc.push_back(c.points[i].acc_mean);
      wall.push_back(c.points[i].wall_clock_s);
      interpolated = interpolated || c.points[i].interpolated;
    }
    const Moments m = population_moments(acc);
    out.points.push_back({first.points[i].epochs, sorted_mean(wall), m.mean, m.std,
                          static_cast<std::int64_t>(curves.size()), interpolated});
  }
  return out;
}

std::optional<double> interpolate_accuracy(const TradeoffCurve& curve, double epochs, bool* interpolated) {
  const auto& pts = curve.points;
  if (interpolated) *interpolated = false;
  if (pts.empty() || epochs < pts.front().epochs || epochs > pts.back().epochs) return std::nullopt;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].epochs == epochs) {
      if (interpolated) *interpolated = pts[i].interpolated;
      return pts[i].acc_mean;
    }
    if (i + 1 < pts.size() && pts[i].epochs < epochs && epochs < pts[i + 1].epochs) {
      const double a = std::log2(pts[i].epochs), b = std::log2(pts[i + 1].epochs);
      const double t = (std::log2(epochs) - a) / (b - a);
      if (interpolated) *interpolated = true;
      return pts[i].acc_mean + t * (pts[i + 1].acc_mean - pts[i].acc_mean);
    }
  }
  return std::nullopt;
}

RelativeCurve relative_improvement(const TradeoffCurve& curve, const TradeoffCurve& baseline) {
  if (curve.kind != baseline.kind)
    throw Error(ErrorKind::kind_mismatch, std::string("cannot subtract a ") + to_string(baseline.kind) +
                                              " baseline from a " + to_string(curve.kind) + " curve");
  RelativeCurve out;
  out.kind = curve.kind;
  out.method_set = curve.method_set;
  out.baseline = baseline.method_set;
  for (const auto& p : curve.points) {
    bool interpolated = false;
    const auto base = interpolate_accuracy(baseline, p.epochs, &interpolated);
    if (!base) continue;
    out.points.push_back({p.epochs, p.acc_mean - *base, interpolated || p.interpolated});
  }
  if (out.points.empty()) throw Error(ErrorKind::no_overlap, "curve and baseline share no duration range");
  return out;
}

double speedup_ratio(double growth_factor, std::int64_t cycles) {
  if (!(growth_factor > 1.0) || !std::isfinite(growth_factor))
    throw Error(ErrorKind::domain, "speedup ratio needs a growth factor above 1");
  if (cycles < 1) throw Error(ErrorKind::domain, "speedup ratio needs at least one cycle");
  const double n = static_cast<double>(cycles);
  return (1.0 - std::pow(growth_factor, n)) / ((1.0 - growth_factor) * std::pow(growth_factor, n - 1.0));
}

WallClockReport wall_clock_totals(std::span<const StandardRun> standard_runs, std::span<const MetricsLog> cyclic_runs,
                                  const CyclePlan& plan, double growth_factor, std::int64_t cycles) {
  if (standard_runs.empty() || cyclic_runs.empty())
    throw Error(ErrorKind::empty_input, "wall-clock comparison needs both standard and cyclic runs");
  std::map<double, std::vector<double>> by_duration;
  for (const auto& run : standard_runs) {
    if (run.log.epochs.empty()) throw Error(ErrorKind::inconsistent, "standard run without epochs");
    by_duration[run.duration_epochs].push_back(run.log.epochs.back().wall_clock_s);
  }
  std::vector<double> durations;
  for (const auto& [d, _] : by_duration) durations.push_back(d);
  if (durations != plan.cycle_end_epochs)
    throw Error(ErrorKind::inconsistent, "sweep durations differ from the cyclic sample points");

  WallClockReport report;
  for (const auto& [d, times] : by_duration) {
    report.sweep_total_s += sorted_mean(times);
    report.sweep_epochs += d;
  }
  std::vector<double> cyclic_times;
  for (const auto& log : cyclic_runs) {
    if (log.epochs.empty()) throw Error(ErrorKind::inconsistent, "cyclic run without epochs");
    cyclic_times.push_back(log.epochs.back().wall_clock_s);
  }
  report.cyclic_total_s = sorted_mean(cyclic_times);
  report.cyclic_epochs = plan.cycle_end_epochs.back();
  report.measured_ratio = report.sweep_total_s / report.cyclic_total_s;
  report.epoch_ratio = report.sweep_epochs / report.cyclic_epochs;
  report.predicted_ratio = growth_factor > 1.0 ? speedup_ratio(growth_factor, cycles) : report.epoch_ratio;
  return report;
}

std::optional<double> mean_gap(const TradeoffCurve& cyclic, const TradeoffCurve& standard, std::size_t* count) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : standard.points) {
    const auto c = interpolate_accuracy(cyclic, p.epochs);
    if (!c) continue;
    sum += *c - p.acc_mean;
    ++n;
  }
  if (count) *count = n;
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace cyclebench
