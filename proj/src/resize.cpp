// SPDX-License-Identifier: Apache-2.0
#include "pisr/resize.hpp"

#include <cmath>

namespace pisr {

namespace {

// Keys cubic convolution kernel with a = -0.5.
double cubic(double x) {
  x = std::fabs(x);
  if (x <= 1.0) return (1.5 * x - 2.5) * x * x + 1.0;
  if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
  return 0.0;
}

}  // namespace

AxisTaps bicubic_taps(int64_t in_size, int64_t out_size, bool antialias) {
  if (in_size < 1 || out_size < 1) throw ConfigError("bicubic_taps: extents must be >= 1");
  double scale = static_cast<double>(out_size) / static_cast<double>(in_size);
  double kscale = (antialias && scale < 1.0) ? scale : 1.0;

  AxisTaps taps;
  taps.in_size = in_size;
  taps.out_size = out_size;
  taps.tap_count = static_cast<int>(std::ceil(4.0 / kscale)) + 2;
  taps.index.resize(static_cast<size_t>(out_size) * taps.tap_count);
  taps.weight.resize(static_cast<size_t>(out_size) * taps.tap_count);

  for (int64_t i = 0; i < out_size; ++i) {
    double u = (static_cast<double>(i) + 0.5) / scale - 0.5;
    int64_t left = static_cast<int64_t>(std::floor(u - 2.0 / kscale)) + 1;
    double sum = 0.0;
    for (int t = 0; t < taps.tap_count; ++t) {
      double w = kscale * cubic(kscale * (u - static_cast<double>(left + t)));
      taps.weight[static_cast<size_t>(i) * taps.tap_count + t] = w;
      sum += w;
    }
    for (int t = 0; t < taps.tap_count; ++t) {
      size_t o = static_cast<size_t>(i) * taps.tap_count + t;
      taps.weight[o] /= sum;
      int64_t idx = left + t;
      if (idx < 0) idx = 0;
      if (idx >= in_size) idx = in_size - 1;
      taps.index[o] = static_cast<int32_t>(idx);
    }
  }
  return taps;
}

template <typename T>
TensorT<T> bicubic_resize(const TensorT<T>& img, int64_t out_h, int64_t out_w, bool antialias,
                          bool clamp01) {
  if (img.rank() != 3 || img.shape[0] != 1)
    throw ConfigError("bicubic_resize: expected [1,H,W], got " + shape_str(img.shape));
  int64_t H = img.shape[1], W = img.shape[2];
  AxisTaps tw = bicubic_taps(W, out_w, antialias);
  AxisTaps th = bicubic_taps(H, out_h, antialias);

  // Horizontal pass into a double buffer, then vertical.
  std::vector<double> mid(static_cast<size_t>(H) * out_w);
  const T* src = img.ptr();
  for (int64_t y = 0; y < H; ++y) {
    const T* row = src + y * W;
    double* out = mid.data() + y * out_w;
    for (int64_t x = 0; x < out_w; ++x) {
      const int32_t* idx = tw.index.data() + static_cast<size_t>(x) * tw.tap_count;
      const double* wt = tw.weight.data() + static_cast<size_t>(x) * tw.tap_count;
      double acc = 0.0;
      for (int t = 0; t < tw.tap_count; ++t) acc += wt[t] * static_cast<double>(row[idx[t]]);
      out[x] = acc;
    }
  }

  TensorT<T> result({1, out_h, out_w});
  T* dst = result.ptr();
  for (int64_t y = 0; y < out_h; ++y) {
    const int32_t* idx = th.index.data() + static_cast<size_t>(y) * th.tap_count;
    const double* wt = th.weight.data() + static_cast<size_t>(y) * th.tap_count;
    for (int64_t x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int t = 0; t < th.tap_count; ++t) acc += wt[t] * mid[idx[t] * out_w + x];
      if (clamp01) {
        if (acc < 0.0) acc = 0.0;
        if (acc > 1.0) acc = 1.0;
      }
      dst[y * out_w + x] = static_cast<T>(acc);
    }
  }
  return result;
}

template TensorT<float> bicubic_resize<float>(const TensorT<float>&, int64_t, int64_t, bool,
                                              bool);
template TensorT<double> bicubic_resize<double>(const TensorT<double>&, int64_t, int64_t, bool,
                                                bool);

}  // namespace pisr
