// SPDX-License-Identifier: Apache-2.0
#include "pisr/optim.hpp"

#include <cmath>

namespace pisr {

double lr_at(const CosineSchedule& s, int64_t t) {
  if (s.total_steps < 1) throw ConfigError("cosine schedule: total_steps must be >= 1");
  if (!(s.lr_max >= s.lr_min) || !(s.lr_min > 0.0))
    throw ConfigError("cosine schedule: need lr_max >= lr_min > 0");
  if (t < 0) throw ConfigError("cosine schedule: negative step");
  if (t == 0) return s.lr_max;
  if (t >= s.total_steps) return s.lr_min;
  double frac = static_cast<double>(t) / static_cast<double>(s.total_steps);
  return s.lr_min + 0.5 * (s.lr_max - s.lr_min) * (1.0 + std::cos(M_PI * frac));
}

template <typename T>
AdamState<T> make_adam(const std::vector<Param<T>*>& params) {
  AdamState<T> st;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (const auto* p : params) {
    st.m.emplace_back(p->value.shape);
    st.v.emplace_back(p->value.shape);
  }
  return st;
}

template <typename T>
void adam_step(const std::vector<Param<T>*>& params, AdamState<T>& st, double lr) {
  if (st.m.size() != params.size())
    throw ContractError("adam_step: state holds " + std::to_string(st.m.size()) +
                        " moments for " + std::to_string(params.size()) + " parameters");
  st.t += 1;
  double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  T b1 = static_cast<T>(st.beta1), b2 = static_cast<T>(st.beta2);
  T ob1 = static_cast<T>(1.0 - st.beta1), ob2 = static_cast<T>(1.0 - st.beta2);
  T inv_bc1 = static_cast<T>(1.0 / bc1), inv_bc2 = static_cast<T>(1.0 / bc2);
  T step = static_cast<T>(lr), eps = static_cast<T>(st.eps);
  for (size_t k = 0; k < params.size(); ++k) {
    Param<T>& p = *params[k];
    if (p.grad.shape != p.value.shape)
      throw ContractError("adam_step: gradient not populated for " + p.name);
    T* pm = st.m[k].ptr();
    T* pv = st.v[k].ptr();
    T* pw = p.value.ptr();
    const T* pg = p.grad.ptr();
    int64_t n = p.value.numel();
    for (int64_t i = 0; i < n; ++i) {
      T g = pg[i];
      pm[i] = b1 * pm[i] + ob1 * g;
      pv[i] = b2 * pv[i] + ob2 * g * g;
      T mhat = pm[i] * inv_bc1;
      T vhat = pv[i] * inv_bc2;
      pw[i] -= step * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

template AdamState<float> make_adam<float>(const std::vector<Param<float>*>&);
template AdamState<double> make_adam<double>(const std::vector<Param<double>*>&);
template void adam_step<float>(const std::vector<Param<float>*>&, AdamState<float>&, double);
template void adam_step<double>(const std::vector<Param<double>*>&, AdamState<double>&, double);

}  // namespace pisr
