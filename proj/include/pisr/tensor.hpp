// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "pisr/common.hpp"

namespace pisr {

inline int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t e : shape) n *= e;
  return n;
}

inline std::string shape_str(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

// Dense N-D array. Feature maps use N,C,H,W order. Invariant:
// product(shape) == data.size().
template <typename T>
struct TensorT {
  std::vector<int64_t> shape;
  std::vector<T> data;

  TensorT() = default;
  explicit TensorT(std::vector<int64_t> s) : shape(std::move(s)), data(shape_numel(shape), T(0)) {}
  TensorT(std::vector<int64_t> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size()))
      throw ConfigError("tensor: shape " + shape_str(shape) + " does not match data length");
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(shape.size()); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  // 4-D accessors for tests and small utilities; hot loops index manually.
  T& at4(int64_t n, int64_t c, int64_t h, int64_t w) {
    return data[((n * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }
  T at4(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return data[((n * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool finite() const { return all_finite(data.data(), numel()); }

  static TensorT zeros(std::vector<int64_t> s) { return TensorT(std::move(s)); }
  static TensorT full(std::vector<int64_t> s, T v) {
    TensorT t(std::move(s));
    t.fill(v);
    return t;
  }
  static TensorT scalar(T v) { return TensorT({1}, {v}); }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

using Tensor32 = TensorT<float>;
using Tensor64 = TensorT<double>;

template <typename T>
TensorT<T> randn(std::vector<int64_t> shape, std::mt19937_64& rng, double stddev = 1.0) {
  TensorT<T> t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.data) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
TensorT<T> rand_uniform(std::vector<int64_t> shape, std::mt19937_64& rng, double lo = 0.0,
                        double hi = 1.0) {
  TensorT<T> t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.data) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
double dot(const TensorT<T>& a, const TensorT<T>& b) {
  double acc = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) acc += static_cast<double>(a.data[i]) * b.data[i];
  return acc;
}

}  // namespace pisr
