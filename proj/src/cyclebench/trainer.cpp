#include "cyclebench/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace cyclebench {

std::string method_set_label(const MethodFlags& m) {
  std::string label;
  auto add = [&](bool on, const char* tag) {
    if (!on) return;
    if (!label.empty()) label += "+";
    label += tag;
  };
  add(m.blurpool, "BP");
  add(m.channels_last, "CL");
  add(m.label_smoothing, "LS");
  add(m.mixup, "MX");
  return label.empty() ? "baseline" : label;
}

bool same_except_wall_clock(const MetricsLog& a, const MetricsLog& b) {
  if (a.lr != b.lr || a.fingerprint != b.fingerprint || a.seed != b.seed || a.schedule != b.schedule ||
      a.steps_per_epoch != b.steps_per_epoch || a.epochs.size() != b.epochs.size())
    return false;
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    const auto& x = a.epochs[i];
    const auto& y = b.epochs[i];
    if (x.epoch != y.epoch || x.step != y.step || x.train_loss != y.train_loss || x.train_acc != y.train_acc ||
        x.val_acc != y.val_acc)
      return false;
  }
  return true;
}

Step steps_per_epoch(std::size_t train_samples, std::size_t batch_size, std::size_t grad_accum) {
  if (batch_size == 0 || grad_accum == 0) return 0;
  return static_cast<Step>(train_samples / (batch_size * grad_accum));
}

std::vector<std::string> validate(const RunConfig& config, const Dataset& data) {
  std::vector<std::string> issues = validate(config.schedule);
  for (auto& issue : validate(config.optimizer)) issues.push_back(std::move(issue));
  for (auto& issue : validate(effective_model(config), data.sample, data.classes)) issues.push_back(std::move(issue));
  if (config.batch_size < 1) issues.emplace_back("batch size below 1");
  if (config.grad_accum < 1) issues.emplace_back("gradient accumulation below 1");
  if (config.epochs < 0) issues.emplace_back("epochs negative");
  if (config.methods.mixup && config.batch_size < 2) issues.emplace_back("mixup needs batch size of at least 2");
  if (config.methods.label_smoothing && !(config.methods.alpha_ls >= 0.0 && config.methods.alpha_ls <= 1.0))
    issues.emplace_back("label smoothing alpha outside [0, 1]");
  if (config.methods.mixup && !(config.methods.alpha_mx > 0.0 && std::isfinite(config.methods.alpha_mx)))
    issues.emplace_back("mixup alpha must be positive");
  if (data.train.empty()) issues.emplace_back("training split is empty");
  if (data.val.empty()) issues.emplace_back("validation split is empty");
  if (config.optimizer.eta_max != config.schedule.eta_max)
    issues.emplace_back("optimizer eta_max differs from schedule eta_max");
  if (!issues.empty()) return issues;

  const Step spe = steps_per_epoch(data.train.size(), config.batch_size, config.grad_accum);
  if (config.epochs > 0 && spe < 1)
    issues.push_back("batch size x grad_accum exceeds the " + std::to_string(data.train.size()) + " training samples");
  if (config.schedule.steps_per_epoch != spe && spe >= 1)
    issues.push_back("schedule assumes " + std::to_string(config.schedule.steps_per_epoch) +
                     " steps per epoch but the data gives " + std::to_string(spe));
  if (issues.empty() && config.epochs > 0 && config.epochs * spe != total_steps(config.schedule))
    issues.push_back("epochs x steps_per_epoch (" + std::to_string(config.epochs * spe) +
                     ") differs from schedule length (" + std::to_string(total_steps(config.schedule)) + ")");
  return issues;
}

ModelConfig effective_model(const RunConfig& config) {
  ModelConfig model = config.model;
  if (auto* cnn = std::get_if<TinyCnnConfig>(&model); cnn && config.methods.blurpool)
    cnn->downsample = Downsample::blurpool;
  return model;
}

double evaluate(Model& model, const Dataset& data, std::span<const std::size_t> split, Layout layout) {
  if (split.empty()) throw Error(ErrorKind::empty_input, "cannot evaluate on an empty split");
  constexpr std::size_t chunk = 512;
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < split.size(); begin += chunk) {
    const auto part = split.subspan(begin, std::min(chunk, split.size() - begin));
    const auto predicted = predict(model, gather(data, part, layout));
    for (std::size_t i = 0; i < part.size(); ++i)
      if (predicted[i] == data.labels[part[i]]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

TrainResult train_model(const RunConfig& config, const Dataset& data) {
  auto issues = validate(config, data);
  if (!issues.empty()) throw ValidationError(std::move(issues));

  Rng init = Rng::substream(config.seed, "init");
  Rng shuffle = Rng::substream(config.seed, "shuffle");
  Rng mix = Rng::substream(config.seed, "mixup");

  TrainResult result;
  result.model = build_model(effective_model(config), data.sample, data.classes, init);
  MetricsLog& log = result.log;
  log.seed = config.seed;
  log.schedule = shape_name(config.schedule);
  log.steps_per_epoch = steps_per_epoch(data.train.size(), config.batch_size, config.grad_accum);
  if (config.epochs == 0) return result;

  Model& model = result.model;
  SgdwState optimizer(model);
  const Layout layout = config.methods.channels_last ? Layout::channels_last : Layout::channels_first;
  const std::size_t micro = config.batch_size;
  const std::size_t per_step = micro * config.grad_accum;
  const double grad_scale = 1.0 / static_cast<double>(per_step);
  const Step spe = log.steps_per_epoch;
  log.lr.reserve(static_cast<std::size_t>(config.epochs * spe));

  std::vector<std::size_t> order = data.train;
  const auto start = std::chrono::steady_clock::now();
  Step step = 0;
  for (std::int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    try {
      shuffle.shuffle(std::span<std::size_t>(order));
      double loss_sum = 0.0;
      std::size_t correct = 0, seen = 0;
      for (Step s = 0; s < spe; ++s, ++step) {
        const double lr = lr_at(config.schedule, step);
        log.lr.push_back(lr);
        model.zero_grad();
        for (std::size_t m = 0; m < config.grad_accum; ++m) {
          const std::span<const std::size_t> idx(order.data() + (static_cast<std::size_t>(s) * config.grad_accum + m) * micro,
                                                 micro);
          Tensor4 x = gather(data, idx, layout);
          const std::vector<int> labels = gather_labels(data, idx);
          TargetDistribution targets = config.methods.label_smoothing
                                           ? smooth_labels(labels, data.classes, config.methods.alpha_ls)
                                           : TargetDistribution::one_hot(labels, data.classes);
          std::vector<int> credited = labels;
          if (config.methods.mixup) {
            MixupBatch mixed = mixup_batch(x, targets, config.methods.alpha_mx, mix);
            if (mixed.lambda < 0.5)
              for (std::size_t i = 0; i < micro; ++i) credited[i] = labels[mixed.partner[i]];
            x = std::move(mixed.inputs);
            targets = std::move(mixed.targets);
          }
          const Tensor4 logits = model.forward(x);
          LossResult loss = softmax_cross_entropy(logits, targets, grad_scale);
          if (!std::isfinite(loss.loss)) throw Error(ErrorKind::numeric, "non-finite loss");
          model.backward(loss.grad_logits);
          loss_sum += loss.loss * static_cast<double>(micro);
          const std::size_t k = logits.dims().c;
          auto z = logits.data();
          for (std::size_t i = 0; i < micro; ++i) {
            const double* row = z.data() + i * k;
            if (std::max_element(row, row + k) - row == credited[i]) ++correct;
          }
          seen += micro;
        }
        optimizer.step(model, lr, config.optimizer);
      }
      EpochRecord record;
      record.epoch = epoch;
      record.step = step;
      record.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
      record.train_acc = seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
      record.val_acc = evaluate(model, data, data.val, layout);
      double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (!log.epochs.empty() && elapsed <= log.epochs.back().wall_clock_s)
        elapsed = std::nextafter(log.epochs.back().wall_clock_s, std::numeric_limits<double>::infinity());
      record.wall_clock_s = elapsed;
      log.epochs.push_back(record);
    } catch (const RunFailure&) {
      throw;
    } catch (const Error& e) {
      throw RunFailure(e.kind(), std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", step " +
                                     std::to_string(step) + ")",
                       epoch, step);
    }
  }
  const ConvTimer conv = model.conv_time();
  log.conv_seconds = conv.seconds;
  log.conv_calls = conv.calls;
  return result;
}

MetricsLog train(const RunConfig& config, const Dataset& data) { return train_model(config, data).log; }

MetricsLog train(const RunConfig& config) { return train(config, gen_dataset(config.task, config.data_seed)); }

}  // namespace cyclebench
