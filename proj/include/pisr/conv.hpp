// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pisr/tensor.hpp"

namespace pisr {

// Cross-correlation semantics (no kernel flip), zero padding, one bias per
// output channel. Output extent: (H + 2*pad - kh) / stride + 1.
struct Conv2dGeom {
  int stride = 1;
  int pad = 0;
};

// Transposed convolution geometry. Output extent:
// (H - 1) * stride - 2*pad + kh + out_pad. Adjoint of conv2d with the same
// stride/pad when the extents line up.
struct ConvT2dGeom {
  int stride = 1;
  int pad = 0;
  int out_pad = 0;
};

std::vector<int64_t> conv2d_out_shape(const std::vector<int64_t>& x,
                                      const std::vector<int64_t>& w, Conv2dGeom g);
std::vector<int64_t> convt2d_out_shape(const std::vector<int64_t>& x,
                                       const std::vector<int64_t>& w, ConvT2dGeom g);

// x[N,Ci,H,W] * w[Co,Ci,kh,kw] + b[Co] -> y[N,Co,OH,OW]
template <typename T>
TensorT<T> conv2d_fwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                      Conv2dGeom g);
template <typename T>
TensorT<T> conv2d_grad_input(const TensorT<T>& gy, const TensorT<T>& w,
                             const std::vector<int64_t>& x_shape, Conv2dGeom g);
template <typename T>
TensorT<T> conv2d_grad_weight(const TensorT<T>& gy, const TensorT<T>& x,
                              const std::vector<int64_t>& w_shape, Conv2dGeom g);

// x[N,A,h,w] * w[A,B,kh,kw] + b[B] -> y[N,B,H,W]
template <typename T>
TensorT<T> convt2d_fwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                       ConvT2dGeom g);
template <typename T>
TensorT<T> convt2d_grad_input(const TensorT<T>& gy, const TensorT<T>& w,
                              const std::vector<int64_t>& x_shape, ConvT2dGeom g);
template <typename T>
TensorT<T> convt2d_grad_weight(const TensorT<T>& gy, const TensorT<T>& x,
                               const std::vector<int64_t>& w_shape, ConvT2dGeom g);

// Sum of gy over batch and spatial dims, one value per channel (dim 1).
template <typename T>
TensorT<T> grad_bias(const TensorT<T>& gy);

}  // namespace pisr
