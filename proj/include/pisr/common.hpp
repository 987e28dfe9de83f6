// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pisr {

// Error taxonomy: configuration problems (bad shapes/flags), broken calling
// contracts, numeric blow-ups, and I/O failures map to distinct types so the
// CLI can translate them into exit codes.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DType : uint8_t { f32 = 0, f64 = 1 };

inline const char* dtype_name(DType t) { return t == DType::f32 ? "f32" : "f64"; }

// Engine-wide settings. compute_dtype selects the precision the pipelines run
// in (f64 for verification, f32 for training); num_threads bounds intra-op
// parallelism. Both default to the conservative setting.
DType& compute_dtype();
int& num_threads();
bool& check_finite_mode();

// splitmix64; used to derive independent RNG streams from (seed, stream id).
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d4a2fa9c6b6b5dull;
  return z ^ (z >> 31);
}

// Runs body(worker, begin, end) over a static partition of [0, n).
// Each index is processed by exactly one worker and the per-index work is
// independent, so results are bitwise identical for every thread count.
// Nested calls run serially on the calling thread.
void parallel_chunks(int64_t n, const std::function<void(int, int64_t, int64_t)>& body);

constexpr int kMaxWorkers = 64;

// Scratch buffers reused across kernel calls; thread_local, so nested or
// concurrent regions never alias.
template <typename T>
std::vector<T>& worker_scratch(int worker, int slot);

template <typename T>
bool all_finite(const T* p, int64_t n) {
  for (int64_t i = 0; i < n; ++i)
    if (!std::isfinite(static_cast<double>(p[i]))) return false;
  return true;
}

}  // namespace pisr
