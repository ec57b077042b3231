// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cyclebench/compare.hpp"
#include "cyclebench/config.hpp"
#include "cyclebench/experiment.hpp"
#include "cyclebench/plot.hpp"
#include "cyclebench/rng.hpp"
#include "cyclebench/schedule.hpp"
#include "cyclebench/tradeoff.hpp"

using namespace cyclebench;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(CYCLEBENCH_SOURCE_DIR) / "configs";
const fs::path kOut = CYCLEBENCH_ACCEPTANCE_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string points_text(const TradeoffCurve& c) {
  std::ostringstream s;
  for (const auto& p : c.points) s << (s.tellp() ? " " : "") << p.epochs << ":" << fmt("%.4f", p.acc_mean);
  return s.str();
}

// Runs a doctest binary restricted to the given test cases.
Verdict run_suite(const std::string& exe, const std::string& cases, const std::string& log) {
  std::string cmd = exe;
  if (!cases.empty()) cmd += " '--test-case=" + cases + "'";
  cmd += " > " + (kOut / log).string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
  return {ok, fs::path(exe).filename().string() + (ok ? " passed" : " failed, see " + (kOut / log).string())};
}

ResultsBundle both_modes(const ExperimentConfig& c) {
  RunOptions serial;
  serial.jobs = 1;
  ResultsBundle b = run_experiment(c, Mode::sweep, serial);
  merge_bundles(b, run_experiment(c, Mode::cyclic, serial));
  return b;
}

nlohmann::json stripped(const TradeoffCurve& c, const nlohmann::json& config) {
  auto j = curve_to_json(c, config);
  for (auto& p : j["points"]) p.erase("wall_clock_s");
  return j;
}

// The desk reference experiment, run twice; shared by criteria 4, 6 and 10.
struct Reference {
  ResultsBundle first, second;
};

const Reference& reference() {
  static const Reference r = [] {
    const auto c = parse_config(kConfigs / "desk-reference.toml");
    Reference out{both_modes(c), both_modes(c)};
    write_bundle(out.first, kOut / "desk-reference");
    plot_bundle(out.first, kOut / "desk-reference" / "plots");
    return out;
  }();
  return r;
}

Verdict schedule_geometry() {
  const auto spec = make_warm_restarts(2.048, 0.0, 8, 8, 2.0, 6, 1);
  const auto plan = cycle_end_steps(spec);
  const std::vector<double> want{16, 32, 64, 128, 256, 512};
  const bool ok = plan.cycle_end_epochs == want && total_steps(spec) == 512;
  std::ostringstream s;
  for (double e : plan.cycle_end_epochs) s << e << " ";
  return {ok, "cycle ends " + s.str() + "total " + std::to_string(total_steps(spec))};
}

Verdict speedup_arithmetic() {
  const double r26 = speedup_ratio(2.0, 6);
  double worst = 0.0;
  for (double r : {1.01, 1.1, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0})
    for (int n = 1; n <= 12; ++n) {
      const double lhs = speedup_ratio(r, n) * (1.0 - r) * std::pow(r, n - 1);
      const double rhs = 1.0 - std::pow(r, n);
      worst = std::max(worst, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(rhs)));
    }
  return {r26 == 1.96875 && worst <= 1e-12, fmt("ratio(2,6)=%.17g, worst identity error %.3g", r26, worst)};
}

// Closed form written against the formula, walking the cycle boundaries.
double oracle_lr(double hi, double lo, Step warmup, Step t0, double r, Step n, Step step) {
  if (step < warmup) return hi * static_cast<double>(step + 1) / static_cast<double>(warmup);
  Step t = step - warmup;
  for (Step i = 0; i < n; ++i) {
    const auto len = static_cast<Step>(std::llround(static_cast<double>(t0) * std::pow(r, static_cast<double>(i))));
    if (t < len) return lo + 0.5 * (hi - lo) * (1.0 + std::cos(std::numbers::pi * static_cast<double>(t) / len));
    t -= len;
  }
  return std::nan("");
}

Verdict cosine_formula() {
  Rng rng(2024);
  double worst = 0.0;
  bool restarts_exact = true;
  for (int i = 0; i < 10000; ++i) {
    const double hi = 0.01 + 3.0 * rng.uniform(), lo = hi * 0.2 * rng.uniform();
    const Step spe = 1 + static_cast<Step>(rng.below(4)), warmup = static_cast<Step>(rng.below(4));
    const Step t0 = 1 + static_cast<Step>(rng.below(8)), n = 1 + static_cast<Step>(rng.below(5));
    const double r = std::vector<double>{1.0, 1.5, 2.0, 3.0}[rng.below(4)];
    const auto spec = make_warm_restarts(hi, lo, warmup, t0, r, n, spe);
    const Step step = static_cast<Step>(rng.below(static_cast<std::uint64_t>(total_steps(spec))));
    worst = std::max(worst, std::fabs(lr_at(spec, step) - oracle_lr(hi, lo, warmup * spe, t0 * spe, r, n, step)));
    Step begin = spec.warmup_steps;
    for (Step len : cycle_lengths(spec)) {
      restarts_exact = restarts_exact && lr_at(spec, begin) == hi;
      begin += len;
    }
  }
  return {worst <= 1e-12 && restarts_exact,
          fmt("max |lr - closed form| %.3g over 10000 points, restarts exact: %s", worst, restarts_exact ? "yes" : "no")};
}

double mean_abs_gap(const TradeoffCurve& a, const TradeoffCurve& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) sum += std::fabs(a.points[i].acc_mean - b.points[i].acc_mean);
  return sum / static_cast<double>(a.points.size());
}

// Largest drop below the running maximum.
double worst_drop(const TradeoffCurve& c) {
  double best = -1.0, drop = 0.0;
  for (const auto& p : c.points) {
    best = std::max(best, p.acc_mean);
    drop = std::max(drop, best - p.acc_mean);
  }
  return drop;
}

Verdict desk_curves() {
  const auto& b = reference().first;
  if (!b.standard || !b.cyclic || b.partial) return {false, "reference bundle incomplete"};
  if (b.standard->points.size() != 5 || b.cyclic->points.size() != 5) return {false, "expected five points per curve"};
  bool same_grid = true;
  for (std::size_t i = 0; i < 5; ++i) same_grid = same_grid && b.standard->points[i].epochs == b.cyclic->points[i].epochs;
  const double gap = mean_abs_gap(*b.cyclic, *b.standard);
  const double drop_s = worst_drop(*b.standard), drop_c = worst_drop(*b.cyclic);
  const bool ok = same_grid && gap <= 0.02 && drop_s <= 0.005 && drop_c <= 0.005;
  return {ok, fmt("mean |gap| %.2f pts, worst drop standard %.2f / cyclic %.2f pts; standard [%s] cyclic [%s]",
                  100 * gap, 100 * drop_s, 100 * drop_c, points_text(*b.standard).c_str(),
                  points_text(*b.cyclic).c_str())};
}

Verdict relative_ordering() {
  std::vector<ResultsBundle> bundles;
  for (const char* name : {"noisy-baseline", "noisy-ls-mx"}) {
    bundles.push_back(both_modes(parse_config(kConfigs / (std::string(name) + ".toml"))));
    write_bundle(bundles.back(), kOut / name);
  }
  const auto report = compare(bundles, bundles[0].label);
  plot_report(report, bundles, kOut / "noisy-comparison");
  const SignRow* last = nullptr;
  for (const auto& row : report.signs)
    if (row.label == bundles[1].label && (!last || row.epochs > last->epochs)) last = &row;
  if (!last) return {false, "no shared duration between the relative curves"};
  const bool ok = last->agree && last->delta_standard != 0.0;
  return {ok, fmt("at %g epochs LS+MX shifts standard by %+.2f pts and cyclic by %+.2f pts", last->epochs,
                  100 * last->delta_standard, 100 * last->delta_cyclic)};
}

Verdict wall_clock_ratio() {
  const auto& [a, b] = reference();
  if (!a.wall_clock || !b.wall_clock) return {false, "missing wall-clock report"};
  const double measured = (a.wall_clock->sweep_total_s + b.wall_clock->sweep_total_s) /
                          (a.wall_clock->cyclic_total_s + b.wall_clock->cyclic_total_s);
  const bool ok = measured >= 1.7 && measured <= 2.3 && a.wall_clock->predicted_ratio == 31.0 / 16.0;
  return {ok, fmt("measured %.3f over two executions (%.3f, %.3f), predicted %.17g", measured,
                  a.wall_clock->measured_ratio, b.wall_clock->measured_ratio, a.wall_clock->predicted_ratio)};
}

Verdict extraction_oracle() {
  Rng rng(99);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Step spe = 1 + static_cast<Step>(rng.below(3)), warmup = static_cast<Step>(rng.below(4));
    const auto spec = make_warm_restarts(0.1, 0.0, warmup, 1 + static_cast<Step>(rng.below(4)),
                                         rng.below(2) ? 2.0 : 1.0, 1 + static_cast<Step>(rng.below(5)), spe);
    const auto plan = cycle_end_steps(spec);
    MetricsLog log;
    log.schedule = "warm_restarts";
    const Step epochs = total_steps(spec) / spe;
    for (Step e = 1; e <= epochs; ++e) log.epochs.push_back({e, e * spe, 0.0, 0.0, rng.uniform(), 0.0});
    const auto curve = cyclic_curve(log, plan);
    Step prev = warmup * spe;
    for (std::size_t i = 0; i < plan.cycle_end_steps.size(); ++i) {
      double best = -1.0;
      for (const auto& r : log.epochs)
        if (r.step > prev && r.step <= plan.cycle_end_steps[i]) best = std::max(best, r.val_acc);
      if (curve.points.at(i).acc_mean != best) return {false, fmt("mismatch in trial %d cycle %zu", trial, i + 1)};
      prev = plan.cycle_end_steps[i];
    }
    ++checked;
  }
  return {checked == 1000, fmt("%d randomized logs match the brute-force window scan", checked)};
}

Verdict determinism() {
  const auto& [a, b] = reference();
  const bool ok = stripped(*a.standard, a.config) == stripped(*b.standard, b.config) &&
                  stripped(*a.cyclic, a.config) == stripped(*b.cyclic, b.config);
  return {ok, ok ? "curve JSON identical apart from wall clock" : "curve JSON differs between executions"};
}

Verdict constant_periods() {
  const fs::path dir = kOut / "budget150";
  std::vector<ResultsBundle> bundles;
  RunOptions serial;
  serial.jobs = 1;
  for (const char* name : {"multiplicative", "period-5", "period-10", "period-25"}) {
    bundles.push_back(run_experiment(parse_config(kConfigs / ("budget150-" + std::string(name) + ".toml")),
                                     Mode::cyclic, serial));
    write_bundle(bundles.back(), dir / name);
    if (!bundles.back().cyclic) return {false, std::string(name) + " produced no curve"};
  }
  const auto report = compare(bundles, "multiplicative");
  const auto plots = plot_report(report, bundles, dir / "comparison");
  const double budget = bundles[0].cyclic->points.back().epochs;
  double best_constant = -1.0;
  std::string finals;
  for (const auto& b : bundles) {
    const auto& last = b.cyclic->points.back();
    if (last.epochs != budget) return {false, b.label + " ends at a different budget"};
    if (&b != &bundles[0]) best_constant = std::max(best_constant, last.acc_mean);
    finals += " " + b.label + fmt("=%.4f", last.acc_mean);
  }
  const double mult = bundles[0].cyclic->points.back().acc_mean;
  const bool plotted = std::any_of(plots.begin(), plots.end(), [](const fs::path& p) {
    return p.filename() == "tradeoff.svg" && fs::file_size(p) > 0;
  });
  return {plotted && mult >= best_constant - 0.005,
          fmt("final points at %g epochs:", budget) + finals + (plotted ? "; comparison plot written" : "; no plot")};
}

}  // namespace

int main() {
  fs::create_directories(kOut);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"schedule geometry", schedule_geometry},
      {"speedup ratio arithmetic", speedup_arithmetic},
      {"cosine formula against closed form", cosine_formula},
      {"desk-scale curve replication", desk_curves},
      {"relative ordering under label noise", relative_ordering},
      {"wall-clock ratio", wall_clock_ratio},
      {"gradient suite", [] { return run_suite(TEST_GRADIENTS, "", "gradients.log"); }},
      {"method invariants",
       [] {
         auto a = run_suite(TEST_METHODS,
                            "smoothed and mixed target rows sum to one,blur kernel preserves the DC component,"
                            "layout round trip is bit-identical,conv2d is layout invariant*",
                            "methods.log");
         auto b = run_suite(TEST_TRAINER, "every method subset trains*", "subsets.log");
         return Verdict{a.pass && b.pass, a.detail + ", " + b.detail};
       }},
      {"extraction oracle", extraction_oracle},
      {"determinism", determinism},
      {"constant-period comparison", constant_periods},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s [%zu] %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
