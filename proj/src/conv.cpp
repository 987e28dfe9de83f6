// SPDX-License-Identifier: Apache-2.0
#include "pisr/conv.hpp"

#include <Eigen/Core>

namespace pisr {

namespace {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void check_conv_args(const std::vector<int64_t>& x, const std::vector<int64_t>& w,
                     int stride, int pad, bool transposed) {
  if (x.size() != 4 || w.size() != 4)
    throw ConfigError("conv: expected 4-D input and weight, got " + shape_str(x) + " and " +
                      shape_str(w));
  if (stride < 1) throw ConfigError("conv: stride must be >= 1");
  if (pad < 0) throw ConfigError("conv: padding must be >= 0");
  int64_t cx = x[1];
  int64_t cw = transposed ? w[0] : w[1];
  if (cx != cw)
    throw ConfigError("conv: input channels " + std::to_string(cx) + " do not match weight " +
                      shape_str(w));
}

// col[(ci*kh+i)*kw+j, oh*OW+ow] = x[ci, oh*s-p+i, ow*s-p+j] or 0 when padded.
template <typename T>
void im2col(const T* x, int64_t C, int64_t H, int64_t W, int kh, int kw, int stride, int pad,
            int64_t OH, int64_t OW, T* col) {
  for (int64_t c = 0; c < C; ++c) {
    const T* xc = x + c * H * W;
    for (int i = 0; i < kh; ++i) {
      for (int j = 0; j < kw; ++j) {
        T* row = col + ((c * kh + i) * kw + j) * OH * OW;
        for (int64_t oh = 0; oh < OH; ++oh) {
          int64_t ih = oh * stride - pad + i;
          T* dst = row + oh * OW;
          if (ih < 0 || ih >= H) {
            std::fill(dst, dst + OW, T(0));
            continue;
          }
          const T* src = xc + ih * W;
          if (stride == 1) {
            int64_t iw0 = -pad + j;
            for (int64_t ow = 0; ow < OW; ++ow) {
              int64_t iw = iw0 + ow;
              dst[ow] = (iw >= 0 && iw < W) ? src[iw] : T(0);
            }
          } else {
            for (int64_t ow = 0; ow < OW; ++ow) {
              int64_t iw = ow * stride - pad + j;
              dst[ow] = (iw >= 0 && iw < W) ? src[iw] : T(0);
            }
          }
        }
      }
    }
  }
}

// Scatter-add of a col buffer back onto the image grid (adjoint of im2col).
template <typename T>
void col2im_add(const T* col, int64_t C, int64_t H, int64_t W, int kh, int kw, int stride,
                int pad, int64_t OH, int64_t OW, T* x) {
  for (int64_t c = 0; c < C; ++c) {
    T* xc = x + c * H * W;
    for (int i = 0; i < kh; ++i) {
      for (int j = 0; j < kw; ++j) {
        const T* row = col + ((c * kh + i) * kw + j) * OH * OW;
        for (int64_t oh = 0; oh < OH; ++oh) {
          int64_t ih = oh * stride - pad + i;
          if (ih < 0 || ih >= H) continue;
          const T* src = row + oh * OW;
          T* dst = xc + ih * W;
          for (int64_t ow = 0; ow < OW; ++ow) {
            int64_t iw = ow * stride - pad + j;
            if (iw >= 0 && iw < W) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

}  // namespace

std::vector<int64_t> conv2d_out_shape(const std::vector<int64_t>& x,
                                      const std::vector<int64_t>& w, Conv2dGeom g) {
  check_conv_args(x, w, g.stride, g.pad, false);
  int64_t kh = w[2], kw = w[3];
  if (x[2] + 2 * g.pad < kh || x[3] + 2 * g.pad < kw)
    throw ConfigError("conv2d: input " + shape_str(x) + " too small for kernel " + shape_str(w) +
                      " with pad " + std::to_string(g.pad));
  int64_t oh = (x[2] + 2 * g.pad - kh) / g.stride + 1;
  int64_t ow = (x[3] + 2 * g.pad - kw) / g.stride + 1;
  return {x[0], w[0], oh, ow};
}

std::vector<int64_t> convt2d_out_shape(const std::vector<int64_t>& x,
                                       const std::vector<int64_t>& w, ConvT2dGeom g) {
  check_conv_args(x, w, g.stride, g.pad, true);
  if (g.out_pad >= g.stride)
    throw ConfigError("conv_transpose2d: output_padding must be < stride");
  int64_t oh = (x[2] - 1) * g.stride - 2 * g.pad + w[2] + g.out_pad;
  int64_t ow = (x[3] - 1) * g.stride - 2 * g.pad + w[3] + g.out_pad;
  if (oh < 1 || ow < 1)
    throw ConfigError("conv_transpose2d: non-positive output extent for input " + shape_str(x));
  return {x[0], w[1], oh, ow};
}

template <typename T>
TensorT<T> conv2d_fwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                      Conv2dGeom g) {
  auto oshape = conv2d_out_shape(x.shape, w.shape, g);
  if (b.numel() != w.shape[0])
    throw ConfigError("conv2d: bias length " + std::to_string(b.numel()) +
                      " != output channels " + std::to_string(w.shape[0]));
  int64_t N = x.shape[0], Ci = x.shape[1], H = x.shape[2], W = x.shape[3];
  int64_t Co = w.shape[0];
  int kh = static_cast<int>(w.shape[2]), kw = static_cast<int>(w.shape[3]);
  int64_t OH = oshape[2], OW = oshape[3];
  int64_t K = Ci * kh * kw, P = OH * OW;

  TensorT<T> y(oshape);
  parallel_chunks(N, [&](int worker, int64_t n0, int64_t n1) {
    auto& colbuf = worker_scratch<T>(worker, 0);
    colbuf.resize(static_cast<size_t>(K * P));
    ConstMatMap<T> Wm(w.ptr(), Co, K);
    for (int64_t n = n0; n < n1; ++n) {
      im2col(x.ptr() + n * Ci * H * W, Ci, H, W, kh, kw, g.stride, g.pad, OH, OW, colbuf.data());
      ConstMatMap<T> col(colbuf.data(), K, P);
      MatMap<T> out(y.ptr() + n * Co * P, Co, P);
      out.noalias() = Wm * col;
      for (int64_t co = 0; co < Co; ++co) out.row(co).array() += b.data[static_cast<size_t>(co)];
    }
  });
  return y;
}

template <typename T>
TensorT<T> conv2d_grad_input(const TensorT<T>& gy, const TensorT<T>& w,
                             const std::vector<int64_t>& x_shape, Conv2dGeom g) {
  int64_t N = x_shape[0], Ci = x_shape[1], H = x_shape[2], W = x_shape[3];
  int64_t Co = w.shape[0];
  int kh = static_cast<int>(w.shape[2]), kw = static_cast<int>(w.shape[3]);
  int64_t OH = gy.shape[2], OW = gy.shape[3];
  int64_t K = Ci * kh * kw, P = OH * OW;

  TensorT<T> gx(x_shape);
  parallel_chunks(N, [&](int worker, int64_t n0, int64_t n1) {
    auto& colbuf = worker_scratch<T>(worker, 0);
    colbuf.resize(static_cast<size_t>(K * P));
    ConstMatMap<T> Wm(w.ptr(), Co, K);
    for (int64_t n = n0; n < n1; ++n) {
      ConstMatMap<T> gym(gy.ptr() + n * Co * P, Co, P);
      MatMap<T> col(colbuf.data(), K, P);
      col.noalias() = Wm.transpose() * gym;
      col2im_add(colbuf.data(), Ci, H, W, kh, kw, g.stride, g.pad, OH, OW,
                 gx.ptr() + n * Ci * H * W);
    }
  });
  return gx;
}

template <typename T>
TensorT<T> conv2d_grad_weight(const TensorT<T>& gy, const TensorT<T>& x,
                              const std::vector<int64_t>& w_shape, Conv2dGeom g) {
  int64_t N = x.shape[0], Ci = x.shape[1], H = x.shape[2], W = x.shape[3];
  int64_t Co = w_shape[0];
  int kh = static_cast<int>(w_shape[2]), kw = static_cast<int>(w_shape[3]);
  int64_t OH = gy.shape[2], OW = gy.shape[3];
  int64_t K = Ci * kh * kw, P = OH * OW;

  // Per-image partial products, then a fixed-order reduction over the batch
  // so the result does not depend on the thread count.
  std::vector<T> partials(static_cast<size_t>(N * Co * K));
  parallel_chunks(N, [&](int worker, int64_t n0, int64_t n1) {
    auto& colbuf = worker_scratch<T>(worker, 0);
    colbuf.resize(static_cast<size_t>(K * P));
    for (int64_t n = n0; n < n1; ++n) {
      im2col(x.ptr() + n * Ci * H * W, Ci, H, W, kh, kw, g.stride, g.pad, OH, OW, colbuf.data());
      ConstMatMap<T> col(colbuf.data(), K, P);
      ConstMatMap<T> gym(gy.ptr() + n * Co * P, Co, P);
      MatMap<T> part(partials.data() + n * Co * K, Co, K);
      part.noalias() = gym * col.transpose();
    }
  });
  TensorT<T> gw(w_shape);
  for (int64_t n = 0; n < N; ++n) {
    const T* p = partials.data() + n * Co * K;
    for (int64_t i = 0; i < Co * K; ++i) gw.data[static_cast<size_t>(i)] += p[i];
  }
  return gw;
}

template <typename T>
TensorT<T> convt2d_fwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                       ConvT2dGeom g) {
  auto oshape = convt2d_out_shape(x.shape, w.shape, g);
  if (b.numel() != w.shape[1])
    throw ConfigError("conv_transpose2d: bias length " + std::to_string(b.numel()) +
                      " != output channels " + std::to_string(w.shape[1]));
  int64_t N = x.shape[0], A = x.shape[1], h = x.shape[2], wd = x.shape[3];
  int64_t B = w.shape[1];
  int kh = static_cast<int>(w.shape[2]), kw = static_cast<int>(w.shape[3]);
  int64_t OH = oshape[2], OW = oshape[3];
  int64_t K = B * kh * kw, Q = h * wd;

  TensorT<T> y(oshape);
  parallel_chunks(N, [&](int worker, int64_t n0, int64_t n1) {
    auto& colbuf = worker_scratch<T>(worker, 0);
    colbuf.resize(static_cast<size_t>(K * Q));
    ConstMatMap<T> Wm(w.ptr(), A, K);
    for (int64_t n = n0; n < n1; ++n) {
      ConstMatMap<T> xm(x.ptr() + n * A * Q, A, Q);
      MatMap<T> col(colbuf.data(), K, Q);
      col.noalias() = Wm.transpose() * xm;
      T* yn = y.ptr() + n * B * OH * OW;
      // Positions in the out_pad margin receive no taps and stay at bias.
      col2im_add(colbuf.data(), B, OH, OW, kh, kw, g.stride, g.pad, h, wd, yn);
      for (int64_t c = 0; c < B; ++c) {
        T* yc = yn + c * OH * OW;
        T bias = b.data[static_cast<size_t>(c)];
        for (int64_t i = 0; i < OH * OW; ++i) yc[i] += bias;
      }
    }
  });
  return y;
}

template <typename T>
TensorT<T> convt2d_grad_input(const TensorT<T>& gy, const TensorT<T>& w,
                              const std::vector<int64_t>& x_shape, ConvT2dGeom g) {
  int64_t N = x_shape[0], A = x_shape[1], h = x_shape[2], wd = x_shape[3];
  int64_t B = w.shape[1];
  int kh = static_cast<int>(w.shape[2]), kw = static_cast<int>(w.shape[3]);
  int64_t OH = gy.shape[2], OW = gy.shape[3];
  int64_t K = B * kh * kw, Q = h * wd;

  TensorT<T> gx(x_shape);
  parallel_chunks(N, [&](int worker, int64_t n0, int64_t n1) {
    auto& colbuf = worker_scratch<T>(worker, 0);
    colbuf.resize(static_cast<size_t>(K * Q));
    ConstMatMap<T> Wm(w.ptr(), A, K);
    for (int64_t n = n0; n < n1; ++n) {
      im2col(gy.ptr() + n * B * OH * OW, B, OH, OW, kh, kw, g.stride, g.pad, h, wd,
             colbuf.data());
      ConstMatMap<T> col(colbuf.data(), K, Q);
      MatMap<T> out(gx.ptr() + n * A * Q, A, Q);
      out.noalias() = Wm * col;
    }
  });
  return gx;
}

template <typename T>
TensorT<T> convt2d_grad_weight(const TensorT<T>& gy, const TensorT<T>& x,
                               const std::vector<int64_t>& w_shape, ConvT2dGeom g) {
  int64_t N = x.shape[0], A = x.shape[1], h = x.shape[2], wd = x.shape[3];
  int64_t B = w_shape[1];
  int kh = static_cast<int>(w_shape[2]), kw = static_cast<int>(w_shape[3]);
  int64_t OH = gy.shape[2], OW = gy.shape[3];
  int64_t K = B * kh * kw, Q = h * wd;

  std::vector<T> partials(static_cast<size_t>(N * A * K));
  parallel_chunks(N, [&](int worker, int64_t n0, int64_t n1) {
    auto& colbuf = worker_scratch<T>(worker, 0);
    colbuf.resize(static_cast<size_t>(K * Q));
    for (int64_t n = n0; n < n1; ++n) {
      im2col(gy.ptr() + n * B * OH * OW, B, OH, OW, kh, kw, g.stride, g.pad, h, wd,
             colbuf.data());
      ConstMatMap<T> col(colbuf.data(), K, Q);
      ConstMatMap<T> xm(x.ptr() + n * A * Q, A, Q);
      MatMap<T> part(partials.data() + n * A * K, A, K);
      part.noalias() = xm * col.transpose();
    }
  });
  TensorT<T> gw(w_shape);
  for (int64_t n = 0; n < N; ++n) {
    const T* p = partials.data() + n * A * K;
    for (int64_t i = 0; i < A * K; ++i) gw.data[static_cast<size_t>(i)] += p[i];
  }
  return gw;
}

template <typename T>
TensorT<T> grad_bias(const TensorT<T>& gy) {
  int64_t N = gy.shape[0], C = gy.shape[1], P = gy.shape[2] * gy.shape[3];
  TensorT<T> gb({C});
  for (int64_t n = 0; n < N; ++n)
    for (int64_t c = 0; c < C; ++c) {
      const T* p = gy.ptr() + (n * C + c) * P;
      T acc = 0;
      for (int64_t i = 0; i < P; ++i) acc += p[i];
      gb.data[static_cast<size_t>(c)] += acc;
    }
  return gb;
}

#define PISR_INSTANTIATE_CONV(T)                                                              \
  template TensorT<T> conv2d_fwd<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&, \
                                    Conv2dGeom);                                              \
  template TensorT<T> conv2d_grad_input<T>(const TensorT<T>&, const TensorT<T>&,             \
                                           const std::vector<int64_t>&, Conv2dGeom);         \
  template TensorT<T> conv2d_grad_weight<T>(const TensorT<T>&, const TensorT<T>&,            \
                                            const std::vector<int64_t>&, Conv2dGeom);        \
  template TensorT<T> convt2d_fwd<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&,\
                                     ConvT2dGeom);                                            \
  template TensorT<T> convt2d_grad_input<T>(const TensorT<T>&, const TensorT<T>&,            \
                                            const std::vector<int64_t>&, ConvT2dGeom);       \
  template TensorT<T> convt2d_grad_weight<T>(const TensorT<T>&, const TensorT<T>&,           \
                                             const std::vector<int64_t>&, ConvT2dGeom);      \
  template TensorT<T> grad_bias<T>(const TensorT<T>&);

PISR_INSTANTIATE_CONV(float)
PISR_INSTANTIATE_CONV(double)

}  // namespace pisr
