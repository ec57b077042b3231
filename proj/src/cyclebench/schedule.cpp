#include "cyclebench/schedule.hpp"

#include <cmath>
#include <numbers>

#include "cyclebench/error.hpp"

namespace cyclebench {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cosine_phase(double eta_max, double eta_min, Step t_cur, Step t_i) {
  // eta_min + (eta_max - eta_min) can round away from eta_max
  if (t_cur == 0) return eta_max;
  const double fraction = static_cast<double>(t_cur) / static_cast<double>(t_i);
  return eta_min + 0.5 * (eta_max - eta_min) * (1.0 + std::cos(fraction * std::numbers::pi));
}

double triangle_phase(double eta_max, double eta_min, Step t_cur, Step period) {
  const double fraction = static_cast<double>(t_cur) / static_cast<double>(period);
  return eta_min + (eta_max - eta_min) * (1.0 - std::abs(2.0 * fraction - 1.0));
}

}  // namespace

std::vector<std::string> validate(const ScheduleSpec& spec) {
  std::vector<std::string> issues;
  if (!std::isfinite(spec.eta_max) || spec.eta_max < 0.0)
    issues.emplace_back("eta_max must be finite and non-negative");
  if (!std::isfinite(spec.eta_min) || spec.eta_min < 0.0)
    issues.emplace_back("eta_min must be finite and non-negative");
  if (spec.eta_min > spec.eta_max) issues.emplace_back("eta_min exceeds eta_max");
  if (spec.warmup_steps < 0) issues.emplace_back("warmup steps negative");
  if (spec.steps_per_epoch < 1) issues.emplace_back("steps per epoch below 1");

  std::visit(overloaded{
                 [&](const CosineDecay& s) {
                   if (s.steps < 1) issues.emplace_back("cosine decay length below 1");
                 },
                 [&](const WarmRestarts& s) {
                   if (!std::isfinite(s.growth_factor) || s.growth_factor < 1.0)
                     issues.emplace_back("growth factor below 1");
                   if (s.n_cycles < 1) issues.emplace_back("cycle count below 1");
                   if (s.t0_steps < 1) issues.emplace_back("first period below 1 step");
                   if (s.t0_steps >= 1 && s.n_cycles >= 1 && std::isfinite(s.growth_factor) &&
                       s.growth_factor >= 1.0) {
                     const double last = static_cast<double>(s.t0_steps) *
                                         std::pow(s.growth_factor, static_cast<double>(s.n_cycles - 1));
                     if (last > 1e15) issues.emplace_back("schedule length overflows");
                   }
                 },
                 [&](const Sawtooth& s) {
                   if (s.period_steps < 2) issues.emplace_back("sawtooth period below 2 steps");
                   if (s.n_cycles < 1) issues.emplace_back("cycle count below 1");
                 },
                 [&](const Constant& s) {
                   if (s.steps < 0) issues.emplace_back("constant length negative");
                 },
             },
             spec.shape);
  return issues;
}

void require_valid(const ScheduleSpec& spec) {
  auto issues = validate(spec);
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::vector<Step> cycle_lengths(const ScheduleSpec& spec) {
  std::vector<Step> lengths;
  if (const auto* wr = std::get_if<WarmRestarts>(&spec.shape)) {
    lengths.reserve(static_cast<std::size_t>(wr->n_cycles));
    for (Step i = 0; i < wr->n_cycles; ++i) {
      const double exact = static_cast<double>(wr->t0_steps) *
                           std::pow(wr->growth_factor, static_cast<double>(i));
      lengths.push_back(static_cast<Step>(std::llround(exact)));
    }
  } else if (const auto* saw = std::get_if<Sawtooth>(&spec.shape)) {
    lengths.assign(static_cast<std::size_t>(saw->n_cycles), saw->period_steps);
  } else {
    throw Error(ErrorKind::unsupported, "shape '" + shape_name(spec) + "' has no cycles");
  }
  return lengths;
}

Step total_steps(const ScheduleSpec& spec) {
  require_valid(spec);
  Step body = std::visit(overloaded{
                             [](const CosineDecay& s) { return s.steps; },
                             [](const Constant& s) { return s.steps; },
                             [&](const auto&) {
                               Step sum = 0;
                               for (Step len : cycle_lengths(spec)) sum += len;
                               return sum;
                             },
                         },
                         spec.shape);
  return spec.warmup_steps + body;
}

double lr_at(const ScheduleSpec& spec, Step step) {
  const Step total = total_steps(spec);
  if (step < 0 || step >= total)
    throw Error(ErrorKind::range, "step " + std::to_string(step) + " outside [0, " +
                                      std::to_string(total) + ")");
  if (step < spec.warmup_steps)
    return spec.eta_max * static_cast<double>(step + 1) / static_cast<double>(spec.warmup_steps);

  const Step t = step - spec.warmup_steps;
  return std::visit(overloaded{
                        [&](const CosineDecay& s) { return cosine_phase(spec.eta_max, spec.eta_min, t, s.steps); },
                        [&](const Constant&) { return spec.eta_max; },
                        [&](const WarmRestarts&) {
                          Step begin = 0;
                          for (Step len : cycle_lengths(spec)) {
                            if (t < begin + len) return cosine_phase(spec.eta_max, spec.eta_min, t - begin, len);
                            begin += len;
                          }
                          throw Error(ErrorKind::range, "step beyond final cycle");
                        },
                        [&](const Sawtooth& s) {
                          return triangle_phase(spec.eta_max, spec.eta_min, t % s.period_steps, s.period_steps);
                        },
                    },
                    spec.shape);
}

CyclePlan cycle_end_steps(const ScheduleSpec& spec) {
  require_valid(spec);
  CyclePlan plan;
  plan.first_cycle_start = spec.warmup_steps;
  Step end = spec.warmup_steps;
  for (Step len : cycle_lengths(spec)) {
    end += len;
    plan.cycle_end_steps.push_back(end);
    plan.cycle_end_epochs.push_back(static_cast<double>(end) / static_cast<double>(spec.steps_per_epoch));
  }
  return plan;
}

std::string shape_name(const ScheduleSpec& spec) {
  return std::visit(overloaded{
                        [](const CosineDecay&) { return std::string("cosine_decay"); },
                        [](const WarmRestarts&) { return std::string("warm_restarts"); },
                        [](const Sawtooth&) { return std::string("sawtooth"); },
                        [](const Constant&) { return std::string("constant"); },
                    },
                    spec.shape);
}

ScheduleSpec make_cosine_decay(double eta_max, double eta_min, Step warmup_epochs,
                               Step total_epochs, Step steps_per_epoch) {
  ScheduleSpec spec;
  spec.eta_max = eta_max;
  spec.eta_min = eta_min;
  spec.warmup_steps = warmup_epochs * steps_per_epoch;
  spec.steps_per_epoch = steps_per_epoch;
  spec.shape = CosineDecay{(total_epochs - warmup_epochs) * steps_per_epoch};
  return spec;
}

ScheduleSpec make_warm_restarts(double eta_max, double eta_min, Step warmup_epochs,
                                Step t0_epochs, double growth_factor, Step n_cycles,
                                Step steps_per_epoch) {
  ScheduleSpec spec;
  spec.eta_max = eta_max;
  spec.eta_min = eta_min;
  spec.warmup_steps = warmup_epochs * steps_per_epoch;
  spec.steps_per_epoch = steps_per_epoch;
  spec.shape = WarmRestarts{t0_epochs * steps_per_epoch, growth_factor, n_cycles};
  return spec;
}

ScheduleSpec make_sawtooth(double eta_max, double eta_min, Step warmup_epochs,
                           Step period_epochs, Step n_cycles, Step steps_per_epoch) {
  ScheduleSpec spec;
  spec.eta_max = eta_max;
  spec.eta_min = eta_min;
  spec.warmup_steps = warmup_epochs * steps_per_epoch;
  spec.steps_per_epoch = steps_per_epoch;
  spec.shape = Sawtooth{period_epochs * steps_per_epoch, n_cycles};
  return spec;
}

}  // namespace cyclebench
