#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cyclebench/trainer.hpp"

namespace cyclebench {

struct SweepPlan {
  std::vector<std::int64_t> durations{8, 16, 32, 64, 128};
};

enum class CyclicShape { cosine, sawtooth };

/// Cosine cycles of t0 * growth^i epochs (growth 1 gives constant periods),
/// or sawtooth cycles of t0 epochs.
struct CyclicPlan {
  CyclicShape shape = CyclicShape::cosine;
  std::int64_t t0 = 4;
  double growth = 2.0;
  std::int64_t cycles = 5;
};

enum class Mode { sweep, cyclic };

const char* to_string(Mode mode) noexcept;

struct ExperimentConfig {
  std::string name;  // defaults to the method-set label
  TaskSpec task = GaussianMixtureTask{};
  std::uint64_t data_seed = 0;
  ModelConfig model = MlpConfig{};
  OptimizerConfig optimizer;
  double eta_min = 0.0;
  std::size_t batch_size = 128;
  std::size_t grad_accum = 1;
  MethodFlags methods;
  std::int64_t warmup_epochs = 4;
  std::optional<SweepPlan> sweep;
  std::optional<CyclicPlan> cyclic;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string output_dir;
};

/// Reads, validates and materializes every default. Unknown keys, missing
/// required keys and invariant violations are reported together.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(std::string_view text, std::string_view origin = "<config>");

/// Same schema, already parsed into JSON (TOML tables map to objects).
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Canonical JSON snapshot with every field explicit.
nlohmann::json to_json(const ExperimentConfig& config);

/// Canonical TOML echo of the materialized config.
std::string to_toml(const ExperimentConfig& config);
std::string snapshot_to_toml(const nlohmann::json& snapshot);

std::vector<std::string> validate(const ExperimentConfig& config);

/// 16 hex digits identifying the experiment recipe: everything except the
/// output directory and the seed list.
std::string fingerprint(const ExperimentConfig& config);

/// Same digest computed from a to_json() snapshot.
std::string snapshot_fingerprint(const nlohmann::json& snapshot);

/// Schedule and run settings for one run of the experiment.
ScheduleSpec run_schedule(const ExperimentConfig& config, Mode mode, std::int64_t duration, Step steps_per_epoch);
RunConfig make_run_config(const ExperimentConfig& config, Mode mode, std::int64_t duration, std::uint64_t seed,
                          Step steps_per_epoch);

/// Total epochs of the cyclic run (warmup plus every cycle). Throws when the
/// rounded cycle lengths do not end on an epoch boundary.
std::int64_t cyclic_total_epochs(const ExperimentConfig& config, Step steps_per_epoch);

/// Steps per epoch implied by the task size, batch size and accumulation.
Step experiment_steps_per_epoch(const ExperimentConfig& config);

}  // namespace cyclebench
