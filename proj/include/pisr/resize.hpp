// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pisr/tensor.hpp"

namespace pisr {

// Resampling taps for one axis, Keys cubic kernel (a = -0.5). When
// downscaling with antialias the kernel support is widened by the inverse
// scale (reference-resizer convention). Boundary handling clamps source
// indices to the edge; weights are normalized to sum to 1. Layout is
// out_size rows of tap_count (index, weight) pairs.
struct AxisTaps {
  int64_t in_size = 0;
  int64_t out_size = 0;
  int tap_count = 0;
  std::vector<int32_t> index;   // out_size * tap_count
  std::vector<double> weight;  // out_size * tap_count
};

AxisTaps bicubic_taps(int64_t in_size, int64_t out_size, bool antialias);

// Separable resize of a [1,H,W] tensor, horizontal pass then vertical,
// double accumulation. Output clamped to [0,1] unless clamp01 is false.
template <typename T>
TensorT<T> bicubic_resize(const TensorT<T>& img, int64_t out_h, int64_t out_w, bool antialias,
                          bool clamp01 = true);

}  // namespace pisr
