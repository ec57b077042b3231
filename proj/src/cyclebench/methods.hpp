#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cyclebench/rng.hpp"
#include "cyclebench/tensor.hpp"

namespace cyclebench {

/// Per-sample probability vectors over k classes, row-major.
class TargetDistribution {
 public:
  TargetDistribution() = default;
  TargetDistribution(std::size_t rows, std::size_t classes);

  static TargetDistribution one_hot(std::span<const int> labels, std::size_t classes);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t classes() const noexcept { return classes_; }
  std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * classes_, classes_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * classes_, classes_};
  }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t rows_ = 0;
  std::size_t classes_ = 0;
  std::vector<double> values_;
};

/// Row y becomes (1 - alpha) * onehot(y) + alpha / k.
TargetDistribution smooth_labels(std::span<const int> labels, std::size_t classes, double alpha);

/// Applies the same affine smoothing to an existing distribution.
TargetDistribution smooth_targets(const TargetDistribution& targets, double alpha);

struct MixupBatch {
  Tensor4 inputs;
  TargetDistribution targets;
  double lambda = 1.0;
  std::vector<std::size_t> partner;
};

/// Draws lambda ~ Beta(alpha, alpha) once and a random partner permutation,
/// both from `rng`, then mixes inputs and targets alike.
MixupBatch mixup_batch(const Tensor4& inputs, const TargetDistribution& targets, double alpha, Rng& rng);

/// Deterministic mixing with a given lambda and partner permutation.
MixupBatch mixup_with(const Tensor4& inputs, const TargetDistribution& targets, double lambda,
                      std::vector<std::size_t> partner);

/// Normalized 3x3 binomial filter, outer((1,2,1),(1,2,1)) / 16.
const std::array<std::array<double, 3>, 3>& blur_kernel() noexcept;

/// Depthwise binomial blur with reflect padding followed by subsampling.
/// Output spatial size is (H - 1) / stride + 1.
Tensor4 blurpool2d(const Tensor4& x, std::size_t stride);

/// Gradient of blurpool2d with respect to its input.
Tensor4 blurpool2d_backward(const Tensor4& grad_out, const Dims& input_dims, std::size_t stride);

struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

/// Accumulated wall-clock of conv2d calls, for throughput reporting.
struct ConvTimer {
  double seconds = 0.0;
  std::int64_t calls = 0;
};

/// Direct 2-D convolution (cross-correlation, zero padding). `weights` holds
/// dims (out_c, in_c, kh, kw); `bias` is empty or out_c long. The output keeps
/// the input's layout and each layout has its own inner loop ordering.
Tensor4 conv2d(const Tensor4& x, const Tensor4& weights, std::span<const double> bias,
               ConvGeometry geometry, ConvTimer* timer = nullptr);

struct ConvGradients {
  Tensor4 input;
  std::vector<double> weights;  // (out_c, in_c, kh, kw) row-major
  std::vector<double> bias;
};

ConvGradients conv2d_backward(const Tensor4& x, const Tensor4& weights, const Tensor4& grad_out,
                              ConvGeometry geometry, ConvTimer* timer = nullptr);

}  // namespace cyclebench
