#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cyclebench/methods.hpp"
#include "cyclebench/rng.hpp"
#include "cyclebench/tensor.hpp"

namespace cyclebench {

struct ParamRef {
  std::string name;
  std::span<double> values;
  std::span<double> grads;
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual const std::string& name() const = 0;
  /// Caches whatever backward() needs.
  virtual Tensor4 forward(const Tensor4& x) = 0;
  /// Returns the input gradient and accumulates parameter gradients.
  virtual Tensor4 backward(const Tensor4& grad_out) = 0;
  virtual std::vector<ParamRef> parameters() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
  /// Smallest |input| seen by a piecewise-linear kink during the last forward.
  virtual double kink_margin() const;
};

class Dense final : public Layer {
 public:
  Dense(std::string name, std::size_t in, std::size_t out);

  const std::string& name() const override { return name_; }
  Tensor4 forward(const Tensor4& x) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  std::vector<ParamRef> parameters() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  std::size_t in_features() const noexcept { return in_; }
  std::size_t out_features() const noexcept { return out_; }

 private:
  std::string name_;
  std::size_t in_, out_;
  std::vector<double> weight_, bias_, grad_weight_, grad_bias_;
  Tensor4 input_;  // flattened, channels_first
  Dims input_dims_;
  Layout input_layout_ = Layout::channels_first;
};

class Conv2d final : public Layer {
 public:
  Conv2d(std::string name, std::size_t in_c, std::size_t out_c, std::size_t kernel, ConvGeometry geometry);

  const std::string& name() const override { return name_; }
  Tensor4 forward(const Tensor4& x) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  std::vector<ParamRef> parameters() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

  const ConvTimer& timer() const noexcept { return timer_; }

 private:
  std::string name_;
  ConvGeometry geometry_;
  Tensor4 weight_;
  std::vector<double> bias_, grad_weight_, grad_bias_;
  Tensor4 input_;
  ConvTimer timer_;
};

class Relu final : public Layer {
 public:
  explicit Relu(std::string name) : name_(std::move(name)) {}

  const std::string& name() const override { return name_; }
  Tensor4 forward(const Tensor4& x) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
  double kink_margin() const override { return margin_; }

 private:
  std::string name_;
  Tensor4 input_;
  double margin_ = 0.0;
};

class BlurPool final : public Layer {
 public:
  BlurPool(std::string name, std::size_t stride) : name_(std::move(name)), stride_(stride) {}

  const std::string& name() const override { return name_; }
  Tensor4 forward(const Tensor4& x) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BlurPool>(*this); }

 private:
  std::string name_;
  std::size_t stride_;
  Dims input_dims_;
};

class GlobalAvgPool final : public Layer {
 public:
  explicit GlobalAvgPool(std::string name) : name_(std::move(name)) {}

  const std::string& name() const override { return name_; }
  Tensor4 forward(const Tensor4& x) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<GlobalAvgPool>(*this); }

 private:
  std::string name_;
  Dims input_dims_;
  Layout input_layout_ = Layout::channels_first;
};

enum class Downsample { stride, blurpool };

/// Fully connected ReLU network. widths = {inputs, hidden..., classes}.
struct MlpConfig {
  std::vector<std::size_t> widths{32, 64, 10};
};

/// conv3x3 stem followed by one downsampling stage per further channel width,
/// global average pooling and a dense classifier.
struct TinyCnnConfig {
  std::vector<std::size_t> channels{8, 16};
  Downsample downsample = Downsample::stride;
};

using ModelConfig = std::variant<MlpConfig, TinyCnnConfig>;

std::vector<std::string> validate(const ModelConfig& config, const Dims& sample, std::size_t classes);

struct LossResult {
  double loss = 0.0;       // mean over the batch
  Tensor4 grad_logits;     // (p - t) * scale
};

/// Softmax cross-entropy against arbitrary target distributions.
LossResult softmax_cross_entropy(const Tensor4& logits, const TargetDistribution& targets, double scale);

class Model {
 public:
  Model() = default;
  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

  /// Logits (N, classes, 1, 1). Throws a numeric error naming the first layer
  /// whose output is not finite.
  Tensor4 forward(const Tensor4& x);
  void backward(const Tensor4& grad_logits);

  /// Adds d(loss)/d(theta) * (grad_scale * N) into the gradient buffers and
  /// returns the batch-mean loss. grad_scale = 1/N yields the mean-loss
  /// gradient; smaller scales support gradient accumulation.
  double accumulate_gradients(const Tensor4& x, const TargetDistribution& targets, double grad_scale);

  void zero_grad();
  std::vector<ParamRef> parameters();
  std::size_t parameter_count();
  double kink_margin() const;
  ConvTimer conv_time() const;

  const std::vector<std::unique_ptr<Layer>>& layers() const noexcept { return layers_; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

Model build_model(const ModelConfig& config, const Dims& sample, std::size_t classes, Rng& init);

struct ForwardBackwardResult {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;  // one entry per ParamRef, same order
};

/// Mean loss and its exact gradient with respect to every parameter.
ForwardBackwardResult forward_backward(Model& model, const Tensor4& x, const TargetDistribution& targets);

/// Predicted class per sample (lowest index wins ties).
std::vector<int> predict(Model& model, const Tensor4& x);

struct OptimizerConfig {
  double eta_max = 0.128;
  double momentum = 0.875;
  double weight_decay = 5e-4;
  bool decoupled = true;
};

std::vector<std::string> validate(const OptimizerConfig& config);

/// v <- momentum * v + g;  theta <- theta - lr * v - lr * weight_decay * theta
void sgdw_step(std::span<double> params, std::span<double> velocity, std::span<const double> grads,
               double lr, const OptimizerConfig& config);

class SgdwState {
 public:
  explicit SgdwState(Model& model);
  void step(Model& model, double lr, const OptimizerConfig& config);
  const std::vector<std::vector<double>>& velocity() const noexcept { return velocity_; }

 private:
  std::vector<std::vector<double>> velocity_;
};

}  // namespace cyclebench
