#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cyclebench {

enum class Layout { channels_first, channels_last };

const char* to_string(Layout layout) noexcept;

struct Dims {
  std::size_t n = 0, c = 0, h = 0, w = 0;

  std::size_t count() const noexcept { return n * c * h * w; }
  bool operator==(const Dims&) const = default;
};

/// Rank-4 array (N, C, H, W) of doubles. The layout tag fixes the physical
/// element order: NCHW for channels_first, NHWC for channels_last. Logical
/// indexing through at() is the same under both.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Dims dims, Layout layout = Layout::channels_first, double fill = 0.0);
  Tensor4(Dims dims, Layout layout, std::vector<double> data);

  const Dims& dims() const noexcept { return dims_; }
  Layout layout() const noexcept { return layout_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  std::size_t offset(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept {
    if (layout_ == Layout::channels_first) return ((n * dims_.c + c) * dims_.h + h) * dims_.w + w;
    return ((n * dims_.h + h) * dims_.w + w) * dims_.c + c;
  }

  double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) noexcept {
    return data_[offset(n, c, h, w)];
  }
  double at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept {
    return data_[offset(n, c, h, w)];
  }

 private:
  Dims dims_;
  Layout layout_ = Layout::channels_first;
  std::vector<double> data_;
};

/// Physically permutes the buffer into `layout`; logical contents unchanged.
Tensor4 to_layout(const Tensor4& x, Layout layout);

/// Largest |a - b| over logical positions; dims must match.
double max_abs_difference(const Tensor4& a, const Tensor4& b);

}  // namespace cyclebench
