// SPDX-License-Identifier: Apache-2.0
#include "pisr/tape.hpp"

#include <cmath>

namespace pisr {

namespace {

void require_same_shape(const std::vector<int64_t>& a, const std::vector<int64_t>& b,
                        const char* op) {
  if (a != b)
    throw ConfigError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                      shape_str(b));
}

}  // namespace

template <typename T>
Var Tape<T>::push(TensorT<T> v, BackFn back, const char* opname) {
  if (check_finite_ && !v.finite())
    throw NumericError(std::string(opname) + ": non-finite values in result");
  Var out{static_cast<int>(vals_.size())};
  vals_.push_back(std::move(v));
  backs_.push_back(recording_ ? std::move(back) : BackFn{});
  return out;
}

template <typename T>
Var Tape<T>::leaf(const TensorT<T>& v) {
  return push(v, BackFn{}, "leaf");
}

template <typename T>
Var Tape<T>::leaf(TensorT<T>&& v) {
  return push(std::move(v), BackFn{}, "leaf");
}

template <typename T>
T Tape<T>::scalar(Var var) const {
  const auto& t = val(var);
  if (t.numel() != 1) throw ContractError("scalar() on tensor of shape " + shape_str(t.shape));
  return t.data[0];
}

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  require_same_shape(val(a).shape, val(b).shape, "add");
  TensorT<T> out(val(a).shape);
  const T* pa = val(a).ptr();
  const T* pb = val(b).ptr();
  for (int64_t i = 0; i < out.numel(); ++i) out.data[i] = pa[i] + pb[i];
  return push(std::move(out),
              [a, b](Tape& t, int self) {
                const T* go = t.g(self).ptr();
                T* ga = t.g(a.i).ptr();
                T* gb = t.g(b.i).ptr();
                int64_t n = t.g(self).numel();
                for (int64_t i = 0; i < n; ++i) {
                  ga[i] += go[i];
                  gb[i] += go[i];
                }
              },
              "add");
}

template <typename T>
Var Tape<T>::sub(Var a, Var b) {
  require_same_shape(val(a).shape, val(b).shape, "sub");
  TensorT<T> out(val(a).shape);
  const T* pa = val(a).ptr();
  const T* pb = val(b).ptr();
  for (int64_t i = 0; i < out.numel(); ++i) out.data[i] = pa[i] - pb[i];
  return push(std::move(out),
              [a, b](Tape& t, int self) {
                const T* go = t.g(self).ptr();
                T* ga = t.g(a.i).ptr();
                T* gb = t.g(b.i).ptr();
                int64_t n = t.g(self).numel();
                for (int64_t i = 0; i < n; ++i) {
                  ga[i] += go[i];
                  gb[i] -= go[i];
                }
              },
              "sub");
}

template <typename T>
Var Tape<T>::mul(Var a, Var b) {
  require_same_shape(val(a).shape, val(b).shape, "mul");
  TensorT<T> out(val(a).shape);
  const T* pa = val(a).ptr();
  const T* pb = val(b).ptr();
  for (int64_t i = 0; i < out.numel(); ++i) out.data[i] = pa[i] * pb[i];
  return push(std::move(out),
              [a, b](Tape& t, int self) {
                const T* go = t.g(self).ptr();
                const T* pa = t.v(a.i).ptr();
                const T* pb = t.v(b.i).ptr();
                T* ga = t.g(a.i).ptr();
                T* gb = t.g(b.i).ptr();
                int64_t n = t.g(self).numel();
                for (int64_t i = 0; i < n; ++i) {
                  ga[i] += go[i] * pb[i];
                  gb[i] += go[i] * pa[i];
                }
              },
              "mul");
}

template <typename T>
Var Tape<T>::div(Var a, Var b) {
  require_same_shape(val(a).shape, val(b).shape, "div");
  TensorT<T> out(val(a).shape);
  const T* pa = val(a).ptr();
  const T* pb = val(b).ptr();
  for (int64_t i = 0; i < out.numel(); ++i) out.data[i] = pa[i] / pb[i];
  return push(std::move(out),
              [a, b](Tape& t, int self) {
                const T* go = t.g(self).ptr();
                const T* pa = t.v(a.i).ptr();
                const T* pb = t.v(b.i).ptr();
                T* ga = t.g(a.i).ptr();
                T* gb = t.g(b.i).ptr();
                int64_t n = t.g(self).numel();
                for (int64_t i = 0; i < n; ++i) {
                  T inv = T(1) / pb[i];
                  ga[i] += go[i] * inv;
                  gb[i] -= go[i] * pa[i] * inv * inv;
                }
              },
              "div");
}

template <typename T>
Var Tape<T>::add_scalar(Var a, T c) {
  TensorT<T> out(val(a).shape);
  const T* pa = val(a).ptr();
  for (int64_t i = 0; i < out.numel(); ++i) out.data[i] = pa[i] + c;
  return push(std::move(out),
              [a](Tape& t, int self) {
                const T* go = t.g(self).ptr();
                T* ga = t.g(a.i).ptr();
                int64_t n = t.g(self).numel();
                for (int64_t i = 0; i < n; ++i) ga[i] += go[i];
              },
              "add_scalar");
}

template <typename T>
Var Tape<T>::mul_scalar(Var a, T c) {
  TensorT<T> out(val(a).shape);
  const T* pa = val(a).ptr();
  for (int64_t i = 0; i < out.numel(); ++i) out.data[i] = pa[i] * c;
  return push(std::move(out),
              [a, c](Tape& t, int self) {
                const T* go = t.g(self).ptr();
                T* ga = t.g(a.i).ptr();
                int64_t n = t.g(self).numel();
                for (int64_t i = 0; i < n; ++i) ga[i] += go[i] * c;
              },
              "mul_scalar");
}

template <typename T>
Var Tape<T>::abs(Var a) {
  TensorT<T> out(val(a).shape);
  const T* pa = val(a).ptr();
  for (int64_t i = 0; i < out.numel(); ++i) out.data[i] = pa[i] < T(0) ? -pa[i] : pa[i];
  // Subgradient 0 at the kink.
  return push(std::move(out),
              [a](Tape& t, int self) {
                const T* go = t.g(self).ptr();
                const T* pa = t.v(a.i).ptr();
                T* ga = t.g(a.i).ptr();
                int64_t n = t.g(self).numel();
                for (int64_t i = 0; i < n; ++i) {
                  if (pa[i] > T(0))
                    ga[i] += go[i];
                  else if (pa[i] < T(0))
                    ga[i] -= go[i];
                }
              },
              "abs");
}

template <typename T>
Var Tape<T>::log(Var a) {
  TensorT<T> out(val(a).shape);
  const T* pa = val(a).ptr();
  for (int64_t i = 0; i < out.numel(); ++i) out.data[i] = std::log(pa[i]);
  return push(std::move(out),
              [a](Tape& t, int self) {
                const T* go = t.g(self).ptr();
                const T* pa = t.v(a.i).ptr();
                T* ga = t.g(a.i).ptr();
                int64_t n = t.g(self).numel();
                for (int64_t i = 0; i < n; ++i) ga[i] += go[i] / pa[i];
              },
              "log");
}

template <typename T>
Var Tape<T>::sum(Var a) {
  double acc = 0.0;
  const T* pa = val(a).ptr();
  int64_t n = val(a).numel();
  for (int64_t i = 0; i < n; ++i) acc += static_cast<double>(pa[i]);
  return push(TensorT<T>::scalar(static_cast<T>(acc)),
              [a](Tape& t, int self) {
                T go = t.g(self).data[0];
                T* ga = t.g(a.i).ptr();
                int64_t n = t.g(a.i).numel();
                for (int64_t i = 0; i < n; ++i) ga[i] += go;
              },
              "sum");
}

template <typename T>
Var Tape<T>::mean(Var a) {
  double acc = 0.0;
  const T* pa = val(a).ptr();
  int64_t n = val(a).numel();
  if (n == 0) throw ContractError("mean of empty tensor");
  for (int64_t i = 0; i < n; ++i) acc += static_cast<double>(pa[i]);
  T inv = T(1) / static_cast<T>(n);
  return push(TensorT<T>::scalar(static_cast<T>(acc / static_cast<double>(n))),
              [a, inv](Tape& t, int self) {
                T go = t.g(self).data[0] * inv;
                T* ga = t.g(a.i).ptr();
                int64_t m = t.g(a.i).numel();
                for (int64_t i = 0; i < m; ++i) ga[i] += go;
              },
              "mean");
}

template <typename T>
Var Tape<T>::softplus(Var a) {
  TensorT<T> out(val(a).shape);
  const T* pa = val(a).ptr();
  for (int64_t i = 0; i < out.numel(); ++i) {
    T x = pa[i];
    T m = x > T(0) ? x : T(0);
    out.data[i] = m + std::log1p(std::exp(x < T(0) ? x : -x));
  }
  return push(std::move(out),
              [a](Tape& t, int self) {
                const T* go = t.g(self).ptr();
                const T* pa = t.v(a.i).ptr();
                T* ga = t.g(a.i).ptr();
                int64_t n = t.g(self).numel();
                for (int64_t i = 0; i < n; ++i) {
                  // logistic(x), evaluated without overflow on either tail
                  T x = pa[i];
                  T s;
                  if (x >= T(0)) {
                    s = T(1) / (T(1) + std::exp(-x));
                  } else {
                    T e = std::exp(x);
                    s = e / (T(1) + e);
                  }
                  ga[i] += go[i] * s;
                }
              },
              "softplus");
}

template <typename T>
Var Tape<T>::prelu(Var x, Var slopes) {
  const auto& xv = val(x);
  const auto& sv = val(slopes);
  if (xv.rank() != 4) throw ConfigError("prelu: expected 4-D input, got " + shape_str(xv.shape));
  if (sv.numel() != xv.shape[1])
    throw ConfigError("prelu: slope count " + std::to_string(sv.numel()) +
                      " != channels " + std::to_string(xv.shape[1]));
  int64_t N = xv.shape[0], C = xv.shape[1], P = xv.shape[2] * xv.shape[3];
  TensorT<T> out(xv.shape);
  for (int64_t n = 0; n < N; ++n)
    for (int64_t c = 0; c < C; ++c) {
      const T* px = xv.ptr() + (n * C + c) * P;
      T* po = out.ptr() + (n * C + c) * P;
      T a = sv.data[static_cast<size_t>(c)];
      for (int64_t i = 0; i < P; ++i) po[i] = px[i] >= T(0) ? px[i] : a * px[i];
    }
  return push(std::move(out),
              [x, slopes, N, C, P](Tape& t, int self) {
                const T* go = t.g(self).ptr();
                const T* px = t.v(x.i).ptr();
                const T* ps = t.v(slopes.i).ptr();
                T* gx = t.g(x.i).ptr();
                T* gs = t.g(slopes.i).ptr();
                for (int64_t n = 0; n < N; ++n)
                  for (int64_t c = 0; c < C; ++c) {
                    int64_t base = (n * C + c) * P;
                    T a = ps[c];
                    T acc = 0;
                    for (int64_t i = 0; i < P; ++i) {
                      T xi = px[base + i];
                      T gi = go[base + i];
                      if (xi >= T(0)) {
                        gx[base + i] += gi;
                      } else {
                        gx[base + i] += a * gi;
                        acc += gi * xi;
                      }
                    }
                    gs[c] += acc;
                  }
              },
              "prelu");
}

template <typename T>
Var Tape<T>::conv2d(Var x, Var w, Var b, Conv2dGeom geom) {
  TensorT<T> out = conv2d_fwd(val(x), val(w), val(b), geom);
  return push(std::move(out),
              [x, w, b, geom](Tape& t, int self) {
                const TensorT<T>& go = t.g(self);
                {
                  TensorT<T> gx = conv2d_grad_input(go, t.v(w.i), t.v(x.i).shape, geom);
                  T* dst = t.g(x.i).ptr();
                  for (int64_t i = 0; i < gx.numel(); ++i) dst[i] += gx.data[i];
                }
                {
                  TensorT<T> gw = conv2d_grad_weight(go, t.v(x.i), t.v(w.i).shape, geom);
                  T* dst = t.g(w.i).ptr();
                  for (int64_t i = 0; i < gw.numel(); ++i) dst[i] += gw.data[i];
                }
                {
                  TensorT<T> gb = grad_bias(go);
                  T* dst = t.g(b.i).ptr();
                  for (int64_t i = 0; i < gb.numel(); ++i) dst[i] += gb.data[i];
                }
              },
              "conv2d");
}

template <typename T>
Var Tape<T>::conv_transpose2d(Var x, Var w, Var b, ConvT2dGeom geom) {
  TensorT<T> out = convt2d_fwd(val(x), val(w), val(b), geom);
  return push(std::move(out),
              [x, w, b, geom](Tape& t, int self) {
                const TensorT<T>& go = t.g(self);
                {
                  TensorT<T> gx = convt2d_grad_input(go, t.v(w.i), t.v(x.i).shape, geom);
                  T* dst = t.g(x.i).ptr();
                  for (int64_t i = 0; i < gx.numel(); ++i) dst[i] += gx.data[i];
                }
                {
                  TensorT<T> gw = convt2d_grad_weight(go, t.v(x.i), t.v(w.i).shape, geom);
                  T* dst = t.g(w.i).ptr();
                  for (int64_t i = 0; i < gw.numel(); ++i) dst[i] += gw.data[i];
                }
                {
                  TensorT<T> gb = grad_bias(go);
                  T* dst = t.g(b.i).ptr();
                  for (int64_t i = 0; i < gb.numel(); ++i) dst[i] += gb.data[i];
                }
              },
              "conv_transpose2d");
}

template <typename T>
void Tape<T>::backward(Var loss) {
  if (!recording_) throw ContractError("backward() on a non-recording tape");
  if (!loss.ok() || static_cast<size_t>(loss.i) >= vals_.size())
    throw ContractError("backward() on an invalid loss handle");
  if (val(loss).numel() != 1)
    throw ContractError("backward() requires a scalar loss, got " +
                        shape_str(val(loss).shape));
  grads_.clear();
  grads_.reserve(vals_.size());
  for (const auto& v : vals_) grads_.emplace_back(v.shape);
  grads_[static_cast<size_t>(loss.i)].data[0] = T(1);
  for (int i = loss.i; i >= 0; --i) {
    if (backs_[static_cast<size_t>(i)]) backs_[static_cast<size_t>(i)](*this, i);
  }
  if (check_finite_) {
    for (const auto& gt : grads_)
      if (!gt.finite()) throw NumericError("backward: non-finite gradient");
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace pisr
