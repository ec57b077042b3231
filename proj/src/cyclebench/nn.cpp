#include "cyclebench/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cyclebench/error.hpp"

namespace cyclebench {

namespace {

void fill_normal(std::span<double> values, double stddev, Rng& rng) {
  for (double& v : values) v = stddev * rng.normal();
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

double Layer::kink_margin() const { return std::numeric_limits<double>::infinity(); }

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::string name, std::size_t in, std::size_t out)
    : name_(std::move(name)),
      in_(in),
      out_(out),
      weight_(in * out, 0.0),
      bias_(out, 0.0),
      grad_weight_(in * out, 0.0),
      grad_bias_(out, 0.0) {}

Tensor4 Dense::forward(const Tensor4& x) {
  const Dims& d = x.dims();
  if (d.c * d.h * d.w != in_)
    throw Error(ErrorKind::shape, "layer '" + name_ + "' expects " + std::to_string(in_) +
                                      " features per sample, got " + std::to_string(d.c * d.h * d.w));
  input_dims_ = d;
  input_layout_ = x.layout();
  // Flattening follows logical (c, h, w) order.
  input_ = (d.h * d.w > 1) ? to_layout(x, Layout::channels_first) : x;

  Tensor4 out(Dims{d.n, out_, 1, 1}, x.layout());
  auto src = input_.data();
  auto dst = out.data();
  for (std::size_t n = 0; n < d.n; ++n) {
    const double* row = src.data() + n * in_;
    for (std::size_t o = 0; o < out_; ++o) {
      const double* w = weight_.data() + o * in_;
      double acc = bias_[o];
      for (std::size_t i = 0; i < in_; ++i) acc += w[i] * row[i];
      dst[n * out_ + o] = acc;
    }
  }
  return out;
}

Tensor4 Dense::backward(const Tensor4& grad_out) {
  const std::size_t batch = input_dims_.n;
  if (grad_out.dims() != Dims{batch, out_, 1, 1})
    throw Error(ErrorKind::shape, "layer '" + name_ + "' received a gradient of unexpected dims");
  auto g = grad_out.data();
  auto src = input_.data();
  Tensor4 grad_in(input_dims_, Layout::channels_first);
  auto gin = grad_in.data();
  for (std::size_t n = 0; n < batch; ++n) {
    const double* row = src.data() + n * in_;
    double* gin_row = gin.data() + n * in_;
    for (std::size_t o = 0; o < out_; ++o) {
      const double go = g[n * out_ + o];
      if (go == 0.0) continue;
      grad_bias_[o] += go;
      double* gw = grad_weight_.data() + o * in_;
      const double* w = weight_.data() + o * in_;
      for (std::size_t i = 0; i < in_; ++i) {
        gw[i] += go * row[i];
        gin_row[i] += go * w[i];
      }
    }
  }
  return to_layout(grad_in, input_layout_);
}

std::vector<ParamRef> Dense::parameters() {
  return {{name_ + ".weight", weight_, grad_weight_}, {name_ + ".bias", bias_, grad_bias_}};
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::string name, std::size_t in_c, std::size_t out_c, std::size_t kernel, ConvGeometry geometry)
    : name_(std::move(name)),
      geometry_(geometry),
      weight_(Dims{out_c, in_c, kernel, kernel}),
      bias_(out_c, 0.0),
      grad_weight_(out_c * in_c * kernel * kernel, 0.0),
      grad_bias_(out_c, 0.0) {}

Tensor4 Conv2d::forward(const Tensor4& x) {
  input_ = x;
  try {
    return conv2d(x, weight_, bias_, geometry_, &timer_);
  } catch (const Error& e) {
    throw Error(e.kind(), "layer '" + name_ + "': " + e.what());
  }
}

Tensor4 Conv2d::backward(const Tensor4& grad_out) {
  ConvGradients g = conv2d_backward(input_, weight_, grad_out, geometry_, &timer_);
  for (std::size_t i = 0; i < grad_weight_.size(); ++i) grad_weight_[i] += g.weights[i];
  for (std::size_t i = 0; i < grad_bias_.size(); ++i) grad_bias_[i] += g.bias[i];
  return std::move(g.input);
}

std::vector<ParamRef> Conv2d::parameters() {
  return {{name_ + ".weight", weight_.data(), grad_weight_}, {name_ + ".bias", bias_, grad_bias_}};
}

// ---------------------------------------------------------------------------
// Relu

Tensor4 Relu::forward(const Tensor4& x) {
  input_ = x;
  Tensor4 out = x;
  margin_ = std::numeric_limits<double>::infinity();
  for (double& v : out.data()) {
    margin_ = std::min(margin_, std::abs(v));
    if (v < 0.0) v = 0.0;
  }
  return out;
}

Tensor4 Relu::backward(const Tensor4& grad_out) {
  if (grad_out.dims() != input_.dims())
    throw Error(ErrorKind::shape, "layer '" + name_ + "' received a gradient of unexpected dims");
  Tensor4 grad = to_layout(grad_out, input_.layout());
  auto x = input_.data();
  auto g = grad.data();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (x[i] <= 0.0) g[i] = 0.0;
  return grad;
}

// ---------------------------------------------------------------------------
// BlurPool

Tensor4 BlurPool::forward(const Tensor4& x) {
  input_dims_ = x.dims();
  try {
    return blurpool2d(x, stride_);
  } catch (const Error& e) {
    throw Error(e.kind(), "layer '" + name_ + "': " + e.what());
  }
}

Tensor4 BlurPool::backward(const Tensor4& grad_out) { return blurpool2d_backward(grad_out, input_dims_, stride_); }

// ---------------------------------------------------------------------------
// GlobalAvgPool

Tensor4 GlobalAvgPool::forward(const Tensor4& x) {
  input_dims_ = x.dims();
  input_layout_ = x.layout();
  const Dims& d = x.dims();
  Tensor4 out(Dims{d.n, d.c, 1, 1}, x.layout());
  const double inv = 1.0 / static_cast<double>(d.h * d.w);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c) {
      double acc = 0.0;
      for (std::size_t h = 0; h < d.h; ++h)
        for (std::size_t w = 0; w < d.w; ++w) acc += x.at(n, c, h, w);
      out.at(n, c, 0, 0) = acc * inv;
    }
  return out;
}

Tensor4 GlobalAvgPool::backward(const Tensor4& grad_out) {
  const Dims& d = input_dims_;
  if (grad_out.dims() != Dims{d.n, d.c, 1, 1})
    throw Error(ErrorKind::shape, "layer '" + name_ + "' received a gradient of unexpected dims");
  Tensor4 grad(d, input_layout_);
  const double inv = 1.0 / static_cast<double>(d.h * d.w);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c) {
      const double g = grad_out.at(n, c, 0, 0) * inv;
      for (std::size_t h = 0; h < d.h; ++h)
        for (std::size_t w = 0; w < d.w; ++w) grad.at(n, c, h, w) = g;
    }
  return grad;
}

// ---------------------------------------------------------------------------
// Model

Model::Model(const Model& other) {
  layers_.reserve(other.layers_.size());
  for (const auto& layer : other.layers_) layers_.push_back(layer->clone());
}

Model& Model::operator=(const Model& other) {
  if (this != &other) {
    Model copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Tensor4 Model::forward(const Tensor4& x) {
  Tensor4 y = x;
  for (auto& layer : layers_) {
    y = layer->forward(y);
    if (!all_finite(y.data()))
      throw Error(ErrorKind::numeric, "non-finite activation in layer '" + layer->name() + "'");
  }
  return y;
}

void Model::backward(const Tensor4& grad_logits) {
  Tensor4 g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

double Model::accumulate_gradients(const Tensor4& x, const TargetDistribution& targets, double grad_scale) {
  const Tensor4 logits = forward(x);
  LossResult loss = softmax_cross_entropy(logits, targets, grad_scale);
  if (!std::isfinite(loss.loss)) throw Error(ErrorKind::numeric, "non-finite loss");
  backward(loss.grad_logits);
  return loss.loss;
}

void Model::zero_grad() {
  for (auto& p : parameters()) std::fill(p.grads.begin(), p.grads.end(), 0.0);
}

std::vector<ParamRef> Model::parameters() {
  std::vector<ParamRef> out;
  for (auto& layer : layers_)
    for (auto& p : layer->parameters()) out.push_back(std::move(p));
  return out;
}

std::size_t Model::parameter_count() {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.values.size();
  return n;
}

double Model::kink_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& layer : layers_) m = std::min(m, layer->kink_margin());
  return m;
}

ConvTimer Model::conv_time() const {
  ConvTimer total;
  for (const auto& layer : layers_)
    if (const auto* conv = dynamic_cast<const Conv2d*>(layer.get())) {
      total.seconds += conv->timer().seconds;
      total.calls += conv->timer().calls;
    }
  return total;
}

LossResult softmax_cross_entropy(const Tensor4& logits, const TargetDistribution& targets, double scale) {
  const Dims& d = logits.dims();
  if (d.h != 1 || d.w != 1 || d.c != targets.classes() || d.n != targets.rows())
    throw Error(ErrorKind::shape, "logits and targets disagree on shape");
  if (d.n == 0) throw Error(ErrorKind::empty_input, "empty batch");
  LossResult result;
  result.grad_logits = Tensor4(d, logits.layout());
  auto z = logits.data();
  auto g = result.grad_logits.data();
  const std::size_t k = d.c;
  double total = 0.0;
  for (std::size_t n = 0; n < d.n; ++n) {
    const double* zr = z.data() + n * k;
    double* gr = g.data() + n * k;
    auto t = targets.row(n);
    const double m = *std::max_element(zr, zr + k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(zr[j] - m);
    const double lse = m + std::log(sum);
    double mass = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      total += t[j] * (lse - zr[j]);
      mass += t[j];
    }
    for (std::size_t j = 0; j < k; ++j) gr[j] = (std::exp(zr[j] - lse) * mass - t[j]) * scale;
  }
  result.loss = total / static_cast<double>(d.n);
  return result;
}

std::vector<std::string> validate(const ModelConfig& config, const Dims& sample, std::size_t classes) {
  std::vector<std::string> issues;
  if (const auto* mlp = std::get_if<MlpConfig>(&config)) {
    const auto& w = mlp->widths;
    if (w.size() < 3) issues.emplace_back("mlp needs at least one hidden layer (widths = {inputs, hidden..., classes})");
    if (std::any_of(w.begin(), w.end(), [](std::size_t v) { return v < 1; }))
      issues.emplace_back("mlp widths must be at least 1");
    const std::size_t features = sample.c * sample.h * sample.w;
    if (!w.empty() && w.front() != features)
      issues.push_back("mlp input width " + std::to_string(w.front()) + " does not match " +
                       std::to_string(features) + " features");
    if (!w.empty() && w.back() != classes)
      issues.push_back("mlp output width " + std::to_string(w.back()) + " does not match " +
                       std::to_string(classes) + " classes");
  } else {
    const auto& cnn = std::get<TinyCnnConfig>(config);
    if (cnn.channels.empty()) issues.emplace_back("tiny_cnn needs at least one channel width");
    if (std::any_of(cnn.channels.begin(), cnn.channels.end(), [](std::size_t v) { return v < 1; }))
      issues.emplace_back("tiny_cnn channel widths must be at least 1");
    std::size_t h = sample.h, w = sample.w;
    if (h < 3 || w < 3) issues.emplace_back("tiny_cnn needs images of at least 3x3");
    for (std::size_t i = 1; i < cnn.channels.size(); ++i) {
      if (h < 3 || w < 3) {
        issues.emplace_back("tiny_cnn downsamples below 3x3; use fewer stages or larger images");
        break;
      }
      h = (h - 1) / 2 + 1;
      w = (w - 1) / 2 + 1;
    }
  }
  if (classes < 2) issues.emplace_back("at least 2 classes required");
  return issues;
}

Model build_model(const ModelConfig& config, const Dims& sample, std::size_t classes, Rng& init) {
  auto issues = validate(config, sample, classes);
  if (!issues.empty()) throw ValidationError(std::move(issues));

  Model model;
  auto init_dense = [&](Dense& layer, bool last) {
    auto params = layer.parameters();
    // Small classifier weights keep the initial loss close to ln(k).
    const double stddev = last ? 0.1 / std::sqrt(static_cast<double>(layer.in_features()))
                               : std::sqrt(2.0 / static_cast<double>(layer.in_features()));
    fill_normal(params[0].values, stddev, init);
  };

  if (const auto* mlp = std::get_if<MlpConfig>(&config)) {
    const auto& w = mlp->widths;
    for (std::size_t l = 1; l < w.size(); ++l) {
      auto dense = std::make_unique<Dense>("dense" + std::to_string(l), w[l - 1], w[l]);
      const bool last = l + 1 == w.size();
      init_dense(*dense, last);
      model.add(std::move(dense));
      if (!last) model.add(std::make_unique<Relu>("relu" + std::to_string(l)));
    }
    return model;
  }

  const auto& cnn = std::get<TinyCnnConfig>(config);
  std::size_t in_c = sample.c;
  std::size_t index = 1;
  auto add_conv = [&](std::size_t out_c, std::size_t stride) {
    auto conv = std::make_unique<Conv2d>("conv" + std::to_string(index), in_c, out_c, 3, ConvGeometry{stride, 1});
    auto params = conv->parameters();
    fill_normal(params[0].values, std::sqrt(2.0 / static_cast<double>(in_c * 9)), init);
    model.add(std::move(conv));
    model.add(std::make_unique<Relu>("relu" + std::to_string(index)));
    in_c = out_c;
    ++index;
  };
  add_conv(cnn.channels.front(), 1);
  for (std::size_t i = 1; i < cnn.channels.size(); ++i) {
    if (cnn.downsample == Downsample::stride) {
      add_conv(cnn.channels[i], 2);
    } else {
      add_conv(cnn.channels[i], 1);
      model.add(std::make_unique<BlurPool>("blurpool" + std::to_string(i), 2));
    }
  }
  model.add(std::make_unique<GlobalAvgPool>("gap"));
  auto head = std::make_unique<Dense>("dense", in_c, classes);
  init_dense(*head, true);
  model.add(std::move(head));
  return model;
}

ForwardBackwardResult forward_backward(Model& model, const Tensor4& x, const TargetDistribution& targets) {
  if (x.dims().n == 0) throw Error(ErrorKind::empty_input, "empty batch");
  model.zero_grad();
  ForwardBackwardResult result;
  result.loss = model.accumulate_gradients(x, targets, 1.0 / static_cast<double>(x.dims().n));
  for (const auto& p : model.parameters()) result.grads.emplace_back(p.grads.begin(), p.grads.end());
  return result;
}

std::vector<int> predict(Model& model, const Tensor4& x) {
  const Tensor4 logits = model.forward(x);
  const std::size_t k = logits.dims().c;
  auto z = logits.data();
  std::vector<int> out(logits.dims().n);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double* row = z.data() + n * k;
    out[n] = static_cast<int>(std::max_element(row, row + k) - row);
  }
  return out;
}

std::vector<std::string> validate(const OptimizerConfig& config) {
  std::vector<std::string> issues;
  if (!std::isfinite(config.eta_max) || config.eta_max < 0.0) issues.emplace_back("eta_max must be finite and non-negative");
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) issues.emplace_back("momentum outside [0, 1)");
  if (!std::isfinite(config.weight_decay) || config.weight_decay < 0.0) issues.emplace_back("weight decay negative");
  if (!config.decoupled) issues.emplace_back("only decoupled weight decay is supported");
  return issues;
}

void sgdw_step(std::span<double> params, std::span<double> velocity, std::span<const double> grads, double lr,
               const OptimizerConfig& config) {
  if (params.size() != velocity.size() || params.size() != grads.size())
    throw Error(ErrorKind::shape, "parameter, velocity and gradient lengths differ");
  const double decay = lr * config.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = config.momentum * velocity[i] + grads[i];
    params[i] = params[i] - lr * velocity[i] - decay * params[i];
  }
}

SgdwState::SgdwState(Model& model) {
  for (const auto& p : model.parameters()) velocity_.emplace_back(p.values.size(), 0.0);
}

void SgdwState::step(Model& model, double lr, const OptimizerConfig& config) {
  auto params = model.parameters();
  if (params.size() != velocity_.size()) throw Error(ErrorKind::shape, "optimizer state does not match model");
  for (std::size_t i = 0; i < params.size(); ++i) sgdw_step(params[i].values, velocity_[i], params[i].grads, lr, config);
}

}  // namespace cyclebench
