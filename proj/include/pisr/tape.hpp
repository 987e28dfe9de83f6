// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "pisr/conv.hpp"
#include "pisr/tensor.hpp"

namespace pisr {

// Handle to a value recorded on a tape.
struct Var {
  int i = -1;
  bool ok() const { return i >= 0; }
};

// Reverse-mode tape over a closed op set: conv2d, conv_transpose2d, prelu,
// softplus, elementwise add/sub/mul/div/abs/log, scalar add/mul, and
// sum/mean reductions. Nodes are recorded in execution order, which is a
// topological order, so backward() is a single reverse sweep.
//
// A tape is single-threaded; independent tapes may live on separate threads.
template <typename T>
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }

  // Enables a finiteness scan after every forward op (verification mode).
  void set_check_finite(bool on) { check_finite_ = on; }

  Var leaf(const TensorT<T>& v);
  Var leaf(TensorT<T>&& v);

  const TensorT<T>& val(Var v) const { return vals_[static_cast<size_t>(v.i)]; }
  const TensorT<T>& grad(Var v) const { return grads_[static_cast<size_t>(v.i)]; }
  T scalar(Var v) const;

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var add_scalar(Var a, T c);
  Var mul_scalar(Var a, T c);
  Var abs(Var a);
  Var log(Var a);
  Var sum(Var a);
  Var mean(Var a);
  Var softplus(Var a);
  // Per-channel slopes over dim 1; derivative at exactly 0 taken from the
  // non-negative branch (i.e. 1).
  Var prelu(Var x, Var slopes);
  Var conv2d(Var x, Var w, Var b, Conv2dGeom g);
  Var conv_transpose2d(Var x, Var w, Var b, ConvT2dGeom g);

  // max(x, c) composed from primitive ops: (x + c + |x - c|) / 2.
  Var clamp_min(Var x, T c) {
    Var shifted = add_scalar(x, -c);
    return mul_scalar(add_scalar(add(shifted, abs(shifted)), T(2) * c), T(0.5));
  }

  // Seeds d(loss)/d(loss) = 1 and sweeps in reverse topological order; each
  // node's grad is fully accumulated before its own backward fires. Nodes
  // not on a path to the loss keep zero grads.
  void backward(Var loss);

  size_t size() const { return vals_.size(); }

 private:
  using BackFn = std::function<void(Tape&, int self)>;

  Var push(TensorT<T> v, BackFn back, const char* opname);
  TensorT<T>& g(int i) { return grads_[static_cast<size_t>(i)]; }
  const TensorT<T>& v(int i) const { return vals_[static_cast<size_t>(i)]; }

  bool recording_ = true;
  bool check_finite_ = false;
  std::vector<TensorT<T>> vals_;
  std::vector<TensorT<T>> grads_;
  std::vector<BackFn> backs_;
};

using Tape32 = Tape<float>;
using Tape64 = Tape<double>;

}  // namespace pisr
