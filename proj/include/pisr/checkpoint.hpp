// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <string>

#include "pisr/nets.hpp"
#include "pisr/optim.hpp"

namespace pisr {

// Checkpoint file layout (all integers little-endian):
//   magic "PISR1" (5 bytes), u32 version
//   u32 fingerprint length, fingerprint bytes
//   u64 step
//   u32 record count, then per record:
//     u32 name length, name bytes
//     u8 dtype (0 = f32, 1 = f64)
//     u32 rank, u64 extents[rank]
//     raw values
// Optimizer moments, when present, are ordinary records named
// "adam.m.<param>" / "adam.v.<param>" plus a scalar "adam.t".
// Round-trips are bitwise.
struct CheckpointWriter {
  explicit CheckpointWriter(const std::string& path, const std::string& fingerprint,
                            uint64_t step);
  ~CheckpointWriter();
  CheckpointWriter(const CheckpointWriter&) = delete;
  CheckpointWriter& operator=(const CheckpointWriter&) = delete;

  template <typename T>
  void record(const std::string& name, const TensorT<T>& t);
  void finish();

 private:
  void u32(uint32_t v);
  void u64(uint64_t v);
  void bytes(const void* p, size_t n);

  std::string path_;
  FILE* f_ = nullptr;
  long count_pos_ = 0;
  uint32_t count_ = 0;
  bool finished_ = false;
};

struct CheckpointRecord {
  std::string name;
  DType dtype;
  std::vector<int64_t> shape;
  std::vector<unsigned char> raw;

  template <typename T>
  TensorT<T> as() const;
};

struct Checkpoint {
  std::string fingerprint;
  uint64_t step = 0;
  std::vector<CheckpointRecord> records;

  const CheckpointRecord* find(const std::string& name) const;
};

Checkpoint read_checkpoint(const std::string& path);

// Helpers used by the trainer and CLI: a checkpoint holds one or more nets,
// each under a name prefix ("student.", "encoder.", ...).
template <typename T>
void write_params(CheckpointWriter& w, const std::string& prefix, const ParamSet<T>& ps);

// Loads "<prefix><param name>" records into ps. Every parameter must be
// present with matching dtype and shape.
template <typename T>
void load_params(const Checkpoint& c, const std::string& prefix, ParamSet<T>& ps);

}  // namespace pisr
