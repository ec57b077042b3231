#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyclebench/config.hpp"
#include "cyclebench/tradeoff.hpp"

namespace cyclebench {

extern const char* const tool_version;

/// Outcome of one (mode, duration, seed) training run.
struct RunRecord {
  Mode mode = Mode::sweep;
  std::int64_t duration = 0;  // epochs trained (total epochs for cyclic runs)
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string error_kind;
  std::int64_t failed_epoch = 0;
  Step failed_step = 0;
  MetricsLog log;
};

struct ResultsBundle {
  nlohmann::json config;  // canonical snapshot
  std::string fingerprint;
  std::string label;      // experiment name
  std::string method_set;
  std::string tool_version;
  std::string hostname;
  std::string started_at;
  std::string finished_at;
  std::vector<RunRecord> runs;
  std::optional<CyclePlan> plan;  // set once cyclic runs exist
  PeakRule peak_rule = PeakRule::window_max;
  std::optional<TradeoffCurve> standard;
  std::optional<TradeoffCurve> cyclic;
  std::optional<WallClockReport> wall_clock;
  std::vector<std::string> warnings;
  bool partial = false;
};

using RunFunction = std::function<MetricsLog(const RunConfig&, const Dataset&)>;
using ProgressFunction = std::function<void(const std::string&)>;

struct RunOptions {
  std::size_t jobs = 1;
  PeakRule peak_rule = PeakRule::window_max;
  RunFunction run;            // defaults to train()
  ProgressFunction progress;  // called from worker threads, serialized
};

/// Trains every run of one mode (up to `jobs` at a time) and derives the
/// curves. Failed runs are recorded and never abort their siblings.
ResultsBundle run_experiment(const ExperimentConfig& config, Mode mode, const RunOptions& options = {});

/// Rebuilds curves, wall-clock report and the partial flag from the runs.
void derive_curves(ResultsBundle& bundle);

/// Folds `fresh` into `into`: runs of the modes present in `fresh` replace
/// the old ones. Fingerprints must match.
void merge_bundles(ResultsBundle& into, const ResultsBundle& fresh);

/// Writes bundle.json, config.toml, runs/*.csv, curve_*.json and
/// summary.json into `dir`.
void write_bundle(const ResultsBundle& bundle, const std::filesystem::path& dir);
ResultsBundle load_bundle(const std::filesystem::path& dir);

nlohmann::json curve_to_json(const TradeoffCurve& curve, const nlohmann::json& config_snapshot);
TradeoffCurve curve_from_json(const nlohmann::json& doc);

/// Metrics log as CSV: a `# key=value ...` line with the fingerprint, the
/// header, then one row per optimizer step. Epoch columns are filled on the
/// step that closes an epoch.
std::string log_to_csv(const MetricsLog& log, const std::string& extra_meta = {});
MetricsLog log_from_csv(const std::string& text, const std::string& origin = "<csv>");

nlohmann::json summary_json(const ResultsBundle& bundle);

}  // namespace cyclebench
