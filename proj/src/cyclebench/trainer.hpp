#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cyclebench/dataset.hpp"
#include "cyclebench/error.hpp"
#include "cyclebench/nn.hpp"
#include "cyclebench/schedule.hpp"

namespace cyclebench {

struct MethodFlags {
  bool blurpool = false;
  bool channels_last = false;
  bool label_smoothing = false;
  bool mixup = false;
  double alpha_ls = 0.1;
  double alpha_mx = 0.2;
};

/// "baseline" when nothing is enabled, otherwise e.g. "BP+CL+LS+MX".
std::string method_set_label(const MethodFlags& methods);

struct RunConfig {
  TaskSpec task = GaussianMixtureTask{};
  std::uint64_t data_seed = 0;
  ModelConfig model = MlpConfig{};
  OptimizerConfig optimizer;
  ScheduleSpec schedule;
  MethodFlags methods;
  std::int64_t epochs = 0;
  std::size_t batch_size = 128;
  std::size_t grad_accum = 1;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  std::int64_t epoch = 0;   // 1-based
  Step step = 0;            // optimizer steps completed
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double wall_clock_s = 0.0;  // cumulative since the run started
};

struct MetricsLog {
  std::vector<double> lr;  // one entry per optimizer step
  std::vector<EpochRecord> epochs;
  std::string fingerprint;
  std::uint64_t seed = 0;
  std::string schedule;
  Step steps_per_epoch = 0;
  double conv_seconds = 0.0;
  std::int64_t conv_calls = 0;
};

/// True when everything except wall-clock and conv timing matches bit-exactly.
bool same_except_wall_clock(const MetricsLog& a, const MetricsLog& b);

/// Optimizer steps per epoch; incomplete trailing batches are dropped.
Step steps_per_epoch(std::size_t train_samples, std::size_t batch_size, std::size_t grad_accum);

/// A training run that failed part way through.
class RunFailure : public Error {
 public:
  RunFailure(ErrorKind kind, const std::string& message, std::int64_t epoch, Step step)
      : Error(kind, message), epoch_(epoch), step_(step) {}
  std::int64_t epoch() const noexcept { return epoch_; }
  Step step() const noexcept { return step_; }

 private:
  std::int64_t epoch_;
  Step step_;
};

std::vector<std::string> validate(const RunConfig& config, const Dataset& data);

/// Model architecture after method flags are applied (blurpool swaps the
/// TinyCNN downsampling).
ModelConfig effective_model(const RunConfig& config);

struct TrainResult {
  MetricsLog log;
  Model model;
};

TrainResult train_model(const RunConfig& config, const Dataset& data);
MetricsLog train(const RunConfig& config, const Dataset& data);
MetricsLog train(const RunConfig& config);

/// Top-1 accuracy on the given samples; does not touch parameters.
double evaluate(Model& model, const Dataset& data, std::span<const std::size_t> split,
                Layout layout = Layout::channels_first);

}  // namespace cyclebench
