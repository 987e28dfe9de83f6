// SPDX-License-Identifier: Apache-2.0
#include "pisr/checkpoint.hpp"

#include <cstring>

namespace pisr {

namespace {
constexpr char kMagic[5] = {'P', 'I', 'S', 'R', '1'};
constexpr uint32_t kVersion = 1;

template <typename T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<float>() {
  return DType::f32;
}
template <>
constexpr DType dtype_of<double>() {
  return DType::f64;
}
}  // namespace

CheckpointWriter::CheckpointWriter(const std::string& path, const std::string& fingerprint,
                                   uint64_t step)
    : path_(path) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw IoError("cannot open checkpoint for writing: " + path);
  bytes(kMagic, sizeof(kMagic));
  u32(kVersion);
  u32(static_cast<uint32_t>(fingerprint.size()));
  bytes(fingerprint.data(), fingerprint.size());
  u64(step);
  count_pos_ = std::ftell(f_);
  u32(0);  // patched in finish()
}

CheckpointWriter::~CheckpointWriter() {
  if (f_) std::fclose(f_);
}

void CheckpointWriter::u32(uint32_t v) { bytes(&v, sizeof(v)); }
void CheckpointWriter::u64(uint64_t v) { bytes(&v, sizeof(v)); }

void CheckpointWriter::bytes(const void* p, size_t n) {
  if (std::fwrite(p, 1, n, f_) != n) throw IoError("short write to checkpoint: " + path_);
}

template <typename T>
void CheckpointWriter::record(const std::string& name, const TensorT<T>& t) {
  u32(static_cast<uint32_t>(name.size()));
  bytes(name.data(), name.size());
  uint8_t tag = static_cast<uint8_t>(dtype_of<T>());
  bytes(&tag, 1);
  u32(static_cast<uint32_t>(t.shape.size()));
  for (int64_t e : t.shape) u64(static_cast<uint64_t>(e));
  bytes(t.data.data(), t.data.size() * sizeof(T));
  ++count_;
}

void CheckpointWriter::finish() {
  if (finished_) return;
  if (std::fseek(f_, count_pos_, SEEK_SET) != 0 || false)
    throw IoError("seek failed on checkpoint: " + path_);
  u32(count_);
  if (std::fclose(f_) != 0) throw IoError("close failed on checkpoint: " + path_);
  f_ = nullptr;
  finished_ = true;
}

namespace {

struct Reader {
  FILE* f;
  std::string path;

  void bytes(void* p, size_t n, const char* what) {
    if (std::fread(p, 1, n, f) != n)
      throw IoError("checkpoint " + path + ": truncated while reading " + what);
  }
  uint32_t u32(const char* what) {
    uint32_t v;
    bytes(&v, sizeof(v), what);
    return v;
  }
  uint64_t u64(const char* what) {
    uint64_t v;
    bytes(&v, sizeof(v), what);
    return v;
  }
  std::string str(uint32_t n, const char* what) {
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }
};

}  // namespace

Checkpoint read_checkpoint(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open checkpoint: " + path);
  Reader r{f, path};
  Checkpoint c;
  try {
    char magic[5];
    r.bytes(magic, 5, "magic");
    if (std::memcmp(magic, kMagic, 5) != 0)
      throw IoError("checkpoint " + path + ": bad magic");
    uint32_t ver = r.u32("version");
    if (ver != kVersion)
      throw IoError("checkpoint " + path + ": unsupported version " + std::to_string(ver));
    c.fingerprint = r.str(r.u32("fingerprint length"), "fingerprint");
    c.step = r.u64("step");
    uint32_t n = r.u32("record count");
    c.records.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
      CheckpointRecord rec;
      rec.name = r.str(r.u32("record name length"), "record name");
      uint8_t tag;
      r.bytes(&tag, 1, ("dtype of " + rec.name).c_str());
      if (tag > 1) throw IoError("checkpoint " + path + ": bad dtype tag for " + rec.name);
      rec.dtype = static_cast<DType>(tag);
      uint32_t rank = r.u32(("rank of " + rec.name).c_str());
      if (rank > 8) throw IoError("checkpoint " + path + ": absurd rank for " + rec.name);
      rec.shape.resize(rank);
      int64_t numel = 1;
      for (uint32_t d = 0; d < rank; ++d) {
        rec.shape[d] = static_cast<int64_t>(r.u64(("extent of " + rec.name).c_str()));
        numel *= rec.shape[d];
      }
      size_t bytes = static_cast<size_t>(numel) * (rec.dtype == DType::f32 ? 4 : 8);
      rec.raw.resize(bytes);
      r.bytes(rec.raw.data(), bytes, ("values of " + rec.name).c_str());
      c.records.push_back(std::move(rec));
    }
  } catch (...) {
    std::fclose(f);
    throw;
  }
  std::fclose(f);
  return c;
}

const CheckpointRecord* Checkpoint::find(const std::string& name) const {
  for (const auto& r : records)
    if (r.name == name) return &r;
  return nullptr;
}

template <typename T>
TensorT<T> CheckpointRecord::as() const {
  if (dtype != dtype_of<T>())
    throw IoError("checkpoint record " + name + ": dtype is " + dtype_name(dtype) +
                  ", requested " + dtype_name(dtype_of<T>()));
  TensorT<T> t(shape);
  std::memcpy(t.data.data(), raw.data(), raw.size());
  return t;
}

template <typename T>
void write_params(CheckpointWriter& w, const std::string& prefix, const ParamSet<T>& ps) {
  for (const auto& p : ps.all()) w.record(prefix + p.name, p.value);
}

template <typename T>
void load_params(const Checkpoint& c, const std::string& prefix, ParamSet<T>& ps) {
  for (auto& p : ps.all()) {
    const CheckpointRecord* rec = c.find(prefix + p.name);
    if (!rec) throw IoError("checkpoint: missing record " + prefix + p.name);
    TensorT<T> t = rec->as<T>();
    if (t.shape != p.value.shape)
      throw IoError("checkpoint record " + rec->name + ": shape " + shape_str(t.shape) +
                    " does not match parameter " + shape_str(p.value.shape));
    p.value = std::move(t);
  }
}

template void CheckpointWriter::record<float>(const std::string&, const TensorT<float>&);
template void CheckpointWriter::record<double>(const std::string&, const TensorT<double>&);
template TensorT<float> CheckpointRecord::as<float>() const;
template TensorT<double> CheckpointRecord::as<double>() const;
template void write_params<float>(CheckpointWriter&, const std::string&, const ParamSet<float>&);
template void write_params<double>(CheckpointWriter&, const std::string&,
                                   const ParamSet<double>&);
template void load_params<float>(const Checkpoint&, const std::string&, ParamSet<float>&);
template void load_params<double>(const Checkpoint&, const std::string&, ParamSet<double>&);

}  // namespace pisr
