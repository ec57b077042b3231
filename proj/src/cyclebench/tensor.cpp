#include "cyclebench/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "cyclebench/error.hpp"

namespace cyclebench {

const char* to_string(Layout layout) noexcept {
  return layout == Layout::channels_first ? "channels_first" : "channels_last";
}

Tensor4::Tensor4(Dims dims, Layout layout, double fill)
    : dims_(dims), layout_(layout), data_(dims.count(), fill) {}

Tensor4::Tensor4(Dims dims, Layout layout, std::vector<double> data)
    : dims_(dims), layout_(layout), data_(std::move(data)) {
  if (data_.size() != dims_.count())
    throw Error(ErrorKind::shape, "tensor buffer length " + std::to_string(data_.size()) +
                                      " does not match dims product " + std::to_string(dims_.count()));
}

Tensor4 to_layout(const Tensor4& x, Layout layout) {
  if (x.layout() == layout) return x;
  const Dims& d = x.dims();
  Tensor4 out(d, layout);
  auto src = x.data();
  auto dst = out.data();
  if (layout == Layout::channels_last) {
    for (std::size_t n = 0; n < d.n; ++n)
      for (std::size_t c = 0; c < d.c; ++c)
        for (std::size_t h = 0; h < d.h; ++h)
          for (std::size_t w = 0; w < d.w; ++w)
            dst[((n * d.h + h) * d.w + w) * d.c + c] = src[((n * d.c + c) * d.h + h) * d.w + w];
  } else {
    for (std::size_t n = 0; n < d.n; ++n)
      for (std::size_t h = 0; h < d.h; ++h)
        for (std::size_t w = 0; w < d.w; ++w)
          for (std::size_t c = 0; c < d.c; ++c)
            dst[((n * d.c + c) * d.h + h) * d.w + w] = src[((n * d.h + h) * d.w + w) * d.c + c];
  }
  return out;
}

double max_abs_difference(const Tensor4& a, const Tensor4& b) {
  if (a.dims() != b.dims()) throw Error(ErrorKind::shape, "tensor dims differ");
  const Dims& d = a.dims();
  double worst = 0.0;
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c)
      for (std::size_t h = 0; h < d.h; ++h)
        for (std::size_t w = 0; w < d.w; ++w)
          worst = std::max(worst, std::abs(a.at(n, c, h, w) - b.at(n, c, h, w)));
  return worst;
}

}  // namespace cyclebench
