// SPDX-License-Identifier: Apache-2.0
#include "pisr/common.hpp"

#include <thread>

namespace pisr {

DType& compute_dtype() {
  static DType mode = DType::f32;
  return mode;
}

int& num_threads() {
  static int n = 1;
  return n;
}

bool& check_finite_mode() {
  static bool on = false;
  return on;
}

namespace {
thread_local int g_parallel_depth = 0;
}  // namespace

void parallel_chunks(int64_t n, const std::function<void(int, int64_t, int64_t)>& body) {
  if (n <= 0) return;
  int workers = num_threads();
  if (workers > kMaxWorkers) workers = kMaxWorkers;
  if (workers > n) workers = static_cast<int>(n);
  if (workers <= 1 || g_parallel_depth > 0) {
    body(0, 0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int64_t begin = w * chunk;
    int64_t end = std::min<int64_t>(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, w, begin, end] {
      ++g_parallel_depth;
      body(w, begin, end);
      --g_parallel_depth;
    });
  }
  for (auto& t : pool) t.join();
}

template <typename T>
std::vector<T>& worker_scratch(int /*worker*/, int slot) {
  thread_local std::vector<T> bufs[2];
  return bufs[slot];
}

template std::vector<float>& worker_scratch<float>(int, int);
template std::vector<double>& worker_scratch<double>(int, int);

}  // namespace pisr
