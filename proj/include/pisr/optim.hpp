// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pisr/nets.hpp"

namespace pisr {

// lr(t) = lr_min + (lr_max - lr_min) * (1 + cos(pi * t / T)) / 2, clamped to
// lr_min past the end.
struct CosineSchedule {
  double lr_max = 1e-3;
  double lr_min = 1e-5;
  int64_t total_steps = 0;
};

double lr_at(const CosineSchedule& s, int64_t t);

// Bias-corrected Adam. Moment tensors are kept in the same order as the
// parameter list handed to make_adam; that list may span several nets (one
// optimizer drives student and estimator jointly).
template <typename T>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t t = 0;
  std::vector<TensorT<T>> m;
  std::vector<TensorT<T>> v;
};

template <typename T>
AdamState<T> make_adam(const std::vector<Param<T>*>& params);

template <typename T>
void adam_step(const std::vector<Param<T>*>& params, AdamState<T>& st, double lr);

template <typename T>
std::vector<Param<T>*> param_ptrs(ParamSet<T>& ps) {
  std::vector<Param<T>*> out;
  out.reserve(ps.size());
  for (auto& p : ps.all()) out.push_back(&p);
  return out;
}

}  // namespace pisr
