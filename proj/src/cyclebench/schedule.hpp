#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace cyclebench {

using Step = std::int64_t;

/// Single cosine decay from eta_max to eta_min over `steps` post-warmup steps.
struct CosineDecay {
  Step steps = 0;
};

/// Cosine annealing with warm restarts. Cycle i lasts round(t0_steps * r^i)
/// steps; growth_factor == 1 gives constant periods.
struct WarmRestarts {
  Step t0_steps = 0;
  double growth_factor = 2.0;
  Step n_cycles = 1;
};

/// Triangular cycles eta_min -> eta_max -> eta_min with a constant period.
struct Sawtooth {
  Step period_steps = 0;
  Step n_cycles = 1;
};

/// Flat eta_max for `steps` post-warmup steps.
struct Constant {
  Step steps = 0;
};

using ScheduleShape = std::variant<CosineDecay, WarmRestarts, Sawtooth, Constant>;

struct ScheduleSpec {
  double eta_max = 0.128;
  double eta_min = 0.0;
  Step warmup_steps = 0;
  ScheduleShape shape = Constant{};
  Step steps_per_epoch = 1;
};

struct CyclePlan {
  Step first_cycle_start = 0;  // warmup steps; earlier epochs belong to no cycle
  std::vector<Step> cycle_end_steps;
  std::vector<double> cycle_end_epochs;
};

/// Every violated invariant; empty when the spec is well formed.
std::vector<std::string> validate(const ScheduleSpec& spec);

/// Throws ValidationError when validate() reports anything.
void require_valid(const ScheduleSpec& spec);

Step total_steps(const ScheduleSpec& spec);

/// Learning rate applied at optimizer step `step` (0-based). Warmup rises
/// linearly to eta_max, reaching it on the last warmup step; cyclic phases use
/// T_cur in [0, T_i - 1] so the final step of a cycle stays just above eta_min.
double lr_at(const ScheduleSpec& spec, Step step);

/// Absolute end positions (exclusive step counts, warmup included) of every
/// cycle. Only defined for WarmRestarts and Sawtooth.
CyclePlan cycle_end_steps(const ScheduleSpec& spec);

/// Lengths of the individual cycles in steps (WarmRestarts/Sawtooth only).
std::vector<Step> cycle_lengths(const ScheduleSpec& spec);

/// Short identifier of the shape: "cosine_decay", "warm_restarts", "sawtooth",
/// "constant".
std::string shape_name(const ScheduleSpec& spec);

/// Helpers that build step-denominated specs from epoch-denominated settings.
ScheduleSpec make_cosine_decay(double eta_max, double eta_min, Step warmup_epochs,
                               Step total_epochs, Step steps_per_epoch);
ScheduleSpec make_warm_restarts(double eta_max, double eta_min, Step warmup_epochs,
                                Step t0_epochs, double growth_factor, Step n_cycles,
                                Step steps_per_epoch);
ScheduleSpec make_sawtooth(double eta_max, double eta_min, Step warmup_epochs,
                           Step period_epochs, Step n_cycles, Step steps_per_epoch);

}  // namespace cyclebench
