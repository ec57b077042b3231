#include "cyclebench/methods.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "cyclebench/error.hpp"

namespace cyclebench {

namespace {

void check_alpha_unit(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorKind::validation, "label smoothing alpha " + std::to_string(alpha) + " outside [0, 1]");
}

class ScopedTimer {
 public:
  explicit ScopedTimer(ConvTimer* timer) : timer_(timer), start_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    if (!timer_) return;
    timer_->seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    ++timer_->calls;
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  ConvTimer* timer_;
  std::chrono::steady_clock::time_point start_;
};

std::size_t reflect(std::ptrdiff_t i, std::size_t extent) {
  const auto n = static_cast<std::ptrdiff_t>(extent);
  if (i < 0) i = -i;
  if (i >= n) i = 2 * n - 2 - i;
  return static_cast<std::size_t>(i);
}

struct ConvShape {
  std::size_t out_c, in_c, kh, kw, oh, ow;
};

ConvShape conv_shape(const Tensor4& x, const Tensor4& weights, ConvGeometry g) {
  const Dims& xd = x.dims();
  const Dims& wd = weights.dims();
  if (g.stride < 1) throw Error(ErrorKind::shape, "conv stride must be at least 1");
  if (wd.c != xd.c)
    throw Error(ErrorKind::shape, "conv expects " + std::to_string(wd.c) + " input channels, got " +
                                      std::to_string(xd.c));
  if (xd.h + 2 * g.padding < wd.h || xd.w + 2 * g.padding < wd.w)
    throw Error(ErrorKind::shape, "conv input smaller than kernel");
  return {wd.n, wd.c, wd.h, wd.w, (xd.h + 2 * g.padding - wd.h) / g.stride + 1,
          (xd.w + 2 * g.padding - wd.w) / g.stride + 1};
}

// (kh, kw, in_c, out_c) ordering for the channels-last inner loops.
std::vector<double> weights_hwio(const Tensor4& weights) {
  const Dims& d = weights.dims();
  std::vector<double> out(d.count());
  for (std::size_t o = 0; o < d.n; ++o)
    for (std::size_t i = 0; i < d.c; ++i)
      for (std::size_t y = 0; y < d.h; ++y)
        for (std::size_t x = 0; x < d.w; ++x) out[((y * d.w + x) * d.c + i) * d.n + o] = weights.at(o, i, y, x);
  return out;
}

bool tap(std::size_t out_pos, std::size_t k, ConvGeometry g, std::size_t extent, std::size_t& in_pos) {
  const auto p = static_cast<std::ptrdiff_t>(out_pos * g.stride + k) - static_cast<std::ptrdiff_t>(g.padding);
  if (p < 0 || p >= static_cast<std::ptrdiff_t>(extent)) return false;
  in_pos = static_cast<std::size_t>(p);
  return true;
}

}  // namespace

TargetDistribution::TargetDistribution(std::size_t rows, std::size_t classes)
    : rows_(rows), classes_(classes), values_(rows * classes, 0.0) {}

TargetDistribution TargetDistribution::one_hot(std::span<const int> labels, std::size_t classes) {
  TargetDistribution out(labels.size(), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
      throw Error(ErrorKind::validation, "label " + std::to_string(labels[i]) + " outside [0, " +
                                             std::to_string(classes) + ")");
    out.row(i)[static_cast<std::size_t>(labels[i])] = 1.0;
  }
  return out;
}

TargetDistribution smooth_labels(std::span<const int> labels, std::size_t classes, double alpha) {
  check_alpha_unit(alpha);
  return smooth_targets(TargetDistribution::one_hot(labels, classes), alpha);
}

TargetDistribution smooth_targets(const TargetDistribution& targets, double alpha) {
  check_alpha_unit(alpha);
  TargetDistribution out(targets.rows(), targets.classes());
  const double floor = alpha / static_cast<double>(targets.classes());
  for (std::size_t r = 0; r < targets.rows(); ++r) {
    auto src = targets.row(r);
    auto dst = out.row(r);
    for (std::size_t k = 0; k < targets.classes(); ++k) dst[k] = (1.0 - alpha) * src[k] + floor;
  }
  return out;
}

MixupBatch mixup_batch(const Tensor4& inputs, const TargetDistribution& targets, double alpha, Rng& rng) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::validation, "mixup alpha must be positive");
  if (inputs.dims().n < 2) throw Error(ErrorKind::degenerate, "mixup needs a batch of at least 2 samples");
  const double lambda = rng.beta(alpha, alpha);
  std::vector<std::size_t> partner(inputs.dims().n);
  std::iota(partner.begin(), partner.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(partner));
  return mixup_with(inputs, targets, lambda, std::move(partner));
}

MixupBatch mixup_with(const Tensor4& inputs, const TargetDistribution& targets, double lambda,
                      std::vector<std::size_t> partner) {
  const Dims& d = inputs.dims();
  if (d.n < 2) throw Error(ErrorKind::degenerate, "mixup needs a batch of at least 2 samples");
  if (targets.rows() != d.n || partner.size() != d.n)
    throw Error(ErrorKind::shape, "mixup inputs, targets and partners disagree on batch size");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorKind::validation, "mixup lambda outside [0, 1]");

  MixupBatch out;
  out.lambda = lambda;
  out.inputs = Tensor4(d, inputs.layout());
  out.targets = TargetDistribution(d.n, targets.classes());
  const std::size_t per_sample = d.c * d.h * d.w;
  // Both layouts keep each sample contiguous, so mixing whole sample blocks
  // is layout independent.
  auto src = inputs.data();
  auto dst = out.inputs.data();
  for (std::size_t i = 0; i < d.n; ++i) {
    const std::size_t j = partner[i];
    if (j >= d.n) throw Error(ErrorKind::shape, "mixup partner index out of range");
    for (std::size_t e = 0; e < per_sample; ++e)
      dst[i * per_sample + e] = lambda * src[i * per_sample + e] + (1.0 - lambda) * src[j * per_sample + e];
    auto ti = targets.row(i);
    auto tj = targets.row(j);
    auto to = out.targets.row(i);
    for (std::size_t k = 0; k < targets.classes(); ++k) to[k] = lambda * ti[k] + (1.0 - lambda) * tj[k];
  }
  out.partner = std::move(partner);
  return out;
}

const std::array<std::array<double, 3>, 3>& blur_kernel() noexcept {
  static const std::array<std::array<double, 3>, 3> kernel = [] {
    constexpr std::array<double, 3> b{1.0, 2.0, 1.0};
    std::array<std::array<double, 3>, 3> k{};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) k[i][j] = b[i] * b[j] / 16.0;
    return k;
  }();
  return kernel;
}

Tensor4 blurpool2d(const Tensor4& x, std::size_t stride) {
  const Dims& d = x.dims();
  if (stride < 2) throw Error(ErrorKind::validation, "blurpool stride must be at least 2");
  if (d.h < 3 || d.w < 3)
    throw Error(ErrorKind::shape, "blurpool input " + std::to_string(d.h) + "x" + std::to_string(d.w) +
                                      " smaller than the 3x3 kernel");
  const auto& k = blur_kernel();
  const Dims od{d.n, d.c, (d.h - 1) / stride + 1, (d.w - 1) / stride + 1};
  Tensor4 out(od, x.layout());
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t oh = 0; oh < od.h; ++oh)
      for (std::size_t ow = 0; ow < od.w; ++ow)
        for (std::size_t c = 0; c < d.c; ++c) {
          double acc = 0.0;
          for (std::size_t dy = 0; dy < 3; ++dy) {
            const std::size_t ih = reflect(static_cast<std::ptrdiff_t>(oh * stride + dy) - 1, d.h);
            for (std::size_t dx = 0; dx < 3; ++dx) {
              const std::size_t iw = reflect(static_cast<std::ptrdiff_t>(ow * stride + dx) - 1, d.w);
              acc += k[dy][dx] * x.at(n, c, ih, iw);
            }
          }
          out.at(n, c, oh, ow) = acc;
        }
  return out;
}

Tensor4 blurpool2d_backward(const Tensor4& grad_out, const Dims& input_dims, std::size_t stride) {
  const Dims& d = input_dims;
  const Dims& od = grad_out.dims();
  if (od.n != d.n || od.c != d.c || od.h != (d.h - 1) / stride + 1 || od.w != (d.w - 1) / stride + 1)
    throw Error(ErrorKind::shape, "blurpool gradient has unexpected dims");
  const auto& k = blur_kernel();
  Tensor4 grad(d, grad_out.layout());
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t oh = 0; oh < od.h; ++oh)
      for (std::size_t ow = 0; ow < od.w; ++ow)
        for (std::size_t c = 0; c < d.c; ++c) {
          const double g = grad_out.at(n, c, oh, ow);
          for (std::size_t dy = 0; dy < 3; ++dy) {
            const std::size_t ih = reflect(static_cast<std::ptrdiff_t>(oh * stride + dy) - 1, d.h);
            for (std::size_t dx = 0; dx < 3; ++dx) {
              const std::size_t iw = reflect(static_cast<std::ptrdiff_t>(ow * stride + dx) - 1, d.w);
              grad.at(n, c, ih, iw) += k[dy][dx] * g;
            }
          }
        }
  return grad;
}

Tensor4 conv2d(const Tensor4& x, const Tensor4& weights, std::span<const double> bias,
               ConvGeometry geometry, ConvTimer* timer) {
  ScopedTimer scoped(timer);
  const ConvShape s = conv_shape(x, weights, geometry);
  if (!bias.empty() && bias.size() != s.out_c)
    throw Error(ErrorKind::shape, "conv bias length does not match output channels");
  const Dims& xd = x.dims();
  Tensor4 out(Dims{xd.n, s.out_c, s.oh, s.ow}, x.layout());
  auto src = x.data();
  auto dst = out.data();

  if (x.layout() == Layout::channels_first) {
    const Tensor4 w = to_layout(weights, Layout::channels_first);
    auto wv = w.data();
    for (std::size_t n = 0; n < xd.n; ++n)
      for (std::size_t oc = 0; oc < s.out_c; ++oc) {
        double* plane = dst.data() + (n * s.out_c + oc) * s.oh * s.ow;
        const double b = bias.empty() ? 0.0 : bias[oc];
        std::fill(plane, plane + s.oh * s.ow, b);
        for (std::size_t ic = 0; ic < s.in_c; ++ic) {
          const double* in_plane = src.data() + (n * xd.c + ic) * xd.h * xd.w;
          for (std::size_t ky = 0; ky < s.kh; ++ky)
            for (std::size_t kx = 0; kx < s.kw; ++kx) {
              const double wk = wv[((oc * s.in_c + ic) * s.kh + ky) * s.kw + kx];
              for (std::size_t oy = 0; oy < s.oh; ++oy) {
                std::size_t iy;
                if (!tap(oy, ky, geometry, xd.h, iy)) continue;
                const double* in_row = in_plane + iy * xd.w;
                double* out_row = plane + oy * s.ow;
                for (std::size_t ox = 0; ox < s.ow; ++ox) {
                  std::size_t ix;
                  if (!tap(ox, kx, geometry, xd.w, ix)) continue;
                  out_row[ox] += wk * in_row[ix];
                }
              }
            }
        }
      }
  } else {
    const std::vector<double> w = weights_hwio(weights);
    for (std::size_t n = 0; n < xd.n; ++n)
      for (std::size_t oy = 0; oy < s.oh; ++oy)
        for (std::size_t ox = 0; ox < s.ow; ++ox) {
          double* out_px = dst.data() + ((n * s.oh + oy) * s.ow + ox) * s.out_c;
          for (std::size_t oc = 0; oc < s.out_c; ++oc) out_px[oc] = bias.empty() ? 0.0 : bias[oc];
          for (std::size_t ky = 0; ky < s.kh; ++ky) {
            std::size_t iy;
            if (!tap(oy, ky, geometry, xd.h, iy)) continue;
            for (std::size_t kx = 0; kx < s.kw; ++kx) {
              std::size_t ix;
              if (!tap(ox, kx, geometry, xd.w, ix)) continue;
              const double* in_px = src.data() + ((n * xd.h + iy) * xd.w + ix) * xd.c;
              const double* w_tap = w.data() + (ky * s.kw + kx) * s.in_c * s.out_c;
              for (std::size_t ic = 0; ic < s.in_c; ++ic) {
                const double v = in_px[ic];
                const double* w_row = w_tap + ic * s.out_c;
                for (std::size_t oc = 0; oc < s.out_c; ++oc) out_px[oc] += v * w_row[oc];
              }
            }
          }
        }
  }
  return out;
}

ConvGradients conv2d_backward(const Tensor4& x, const Tensor4& weights, const Tensor4& grad_out,
                              ConvGeometry geometry, ConvTimer* timer) {
  ScopedTimer scoped(timer);
  const ConvShape s = conv_shape(x, weights, geometry);
  const Dims& xd = x.dims();
  if (grad_out.dims() != Dims{xd.n, s.out_c, s.oh, s.ow})
    throw Error(ErrorKind::shape, "conv output gradient has unexpected dims");
  const Tensor4 go = to_layout(grad_out, x.layout());

  ConvGradients g;
  g.input = Tensor4(xd, x.layout());
  g.weights.assign(weights.size(), 0.0);
  g.bias.assign(s.out_c, 0.0);
  auto src = x.data();
  auto gsrc = go.data();
  auto gin = g.input.data();

  if (x.layout() == Layout::channels_first) {
    const Tensor4 w = to_layout(weights, Layout::channels_first);
    auto wv = w.data();
    for (std::size_t n = 0; n < xd.n; ++n)
      for (std::size_t oc = 0; oc < s.out_c; ++oc) {
        const double* gplane = gsrc.data() + (n * s.out_c + oc) * s.oh * s.ow;
        for (std::size_t p = 0; p < s.oh * s.ow; ++p) g.bias[oc] += gplane[p];
        for (std::size_t ic = 0; ic < s.in_c; ++ic) {
          const double* in_plane = src.data() + (n * xd.c + ic) * xd.h * xd.w;
          double* gin_plane = gin.data() + (n * xd.c + ic) * xd.h * xd.w;
          for (std::size_t ky = 0; ky < s.kh; ++ky)
            for (std::size_t kx = 0; kx < s.kw; ++kx) {
              const std::size_t widx = ((oc * s.in_c + ic) * s.kh + ky) * s.kw + kx;
              const double wk = wv[widx];
              double gw = 0.0;
              for (std::size_t oy = 0; oy < s.oh; ++oy) {
                std::size_t iy;
                if (!tap(oy, ky, geometry, xd.h, iy)) continue;
                for (std::size_t ox = 0; ox < s.ow; ++ox) {
                  std::size_t ix;
                  if (!tap(ox, kx, geometry, xd.w, ix)) continue;
                  const double gv = gplane[oy * s.ow + ox];
                  gw += gv * in_plane[iy * xd.w + ix];
                  gin_plane[iy * xd.w + ix] += gv * wk;
                }
              }
              g.weights[widx] += gw;
            }
        }
      }
  } else {
    const std::vector<double> w = weights_hwio(weights);
    std::vector<double> gw_hwio(w.size(), 0.0);
    for (std::size_t n = 0; n < xd.n; ++n)
      for (std::size_t oy = 0; oy < s.oh; ++oy)
        for (std::size_t ox = 0; ox < s.ow; ++ox) {
          const double* g_px = gsrc.data() + ((n * s.oh + oy) * s.ow + ox) * s.out_c;
          for (std::size_t oc = 0; oc < s.out_c; ++oc) g.bias[oc] += g_px[oc];
          for (std::size_t ky = 0; ky < s.kh; ++ky) {
            std::size_t iy;
            if (!tap(oy, ky, geometry, xd.h, iy)) continue;
            for (std::size_t kx = 0; kx < s.kw; ++kx) {
              std::size_t ix;
              if (!tap(ox, kx, geometry, xd.w, ix)) continue;
              const std::size_t px = ((n * xd.h + iy) * xd.w + ix) * xd.c;
              const std::size_t tap_base = (ky * s.kw + kx) * s.in_c * s.out_c;
              for (std::size_t ic = 0; ic < s.in_c; ++ic) {
                const double v = src[px + ic];
                const double* w_row = w.data() + tap_base + ic * s.out_c;
                double* gw_row = gw_hwio.data() + tap_base + ic * s.out_c;
                double acc = 0.0;
                for (std::size_t oc = 0; oc < s.out_c; ++oc) {
                  gw_row[oc] += v * g_px[oc];
                  acc += w_row[oc] * g_px[oc];
                }
                gin[px + ic] += acc;
              }
            }
          }
        }
    for (std::size_t o = 0; o < s.out_c; ++o)
      for (std::size_t i = 0; i < s.in_c; ++i)
        for (std::size_t y = 0; y < s.kh; ++y)
          for (std::size_t xk = 0; xk < s.kw; ++xk)
            g.weights[((o * s.in_c + i) * s.kh + y) * s.kw + xk] =
                gw_hwio[((y * s.kw + xk) * s.in_c + i) * s.out_c + o];
  }
  return g;
}

}  // namespace cyclebench
