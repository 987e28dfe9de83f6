// SPDX-License-Identifier: Apache-2.0
#include "pisr/data.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "pisr/image.hpp"
#include "pisr/resize.hpp"

namespace fs = std::filesystem;

namespace pisr {

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  Manifest m;
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty manifest: " + path);
  if (std::sscanf(header.c_str(), "scale=%d patch=%d", &m.scale, &m.patch) != 2)
    throw IoError("manifest " + path + ": header must be 'scale=<k> patch=<n>'");
  if (m.scale < 2 || m.scale > 4) throw ConfigError("manifest: scale must be in {2,3,4}");
  if (m.patch < m.scale || m.patch % m.scale != 0)
    throw ConfigError("manifest: patch must be a positive multiple of scale");
  fs::path dir = fs::path(path).parent_path();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    fs::path p(line);
    m.files.push_back(p.is_absolute() ? p.string() : (dir / p).string());
  }
  if (m.files.empty()) throw IoError("manifest " + path + ": no image entries");
  return m;
}

void write_manifest(const std::string& path, int scale, int patch,
                    const std::vector<std::string>& files) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << "scale=" << scale << " patch=" << patch << "\n";
  for (const auto& f : files) out << f << "\n";
}

namespace {

Tensor32 crop_to_multiple(const Tensor32& t, int k) {
  int64_t h = t.shape[1] - t.shape[1] % k;
  int64_t w = t.shape[2] - t.shape[2] % k;
  if (h < k || w < k) throw ConfigError("image smaller than one scale unit");
  if (h == t.shape[1] && w == t.shape[2]) return t;
  Tensor32 out({1, h, w});
  for (int64_t y = 0; y < h; ++y)
    std::memcpy(out.ptr() + y * w, t.ptr() + y * t.shape[2], sizeof(float) * w);
  return out;
}

}  // namespace

Dataset::Dataset(const Manifest& m, bool antialias) : scale_(m.scale), patch_(m.patch) {
  pairs_.reserve(m.files.size());
  for (const auto& f : m.files) {
    ImagePair p;
    p.source = f;
    p.hr = crop_to_multiple(load_luminance(f), scale_);
    p.lr = bicubic_resize(p.hr, p.hr.shape[1] / scale_, p.hr.shape[2] / scale_, antialias);
    if (p.hr.shape[1] >= patch_ && p.hr.shape[2] >= patch_) ++usable_;
    pairs_.push_back(std::move(p));
  }
}

ImagePair crop_pair(const ImagePair& pair, int patch_hr, int scale, std::mt19937_64& rng) {
  if (patch_hr % scale != 0) throw ConfigError("crop_pair: patch not divisible by scale");
  int64_t H = pair.hr.shape[1], W = pair.hr.shape[2];
  if (H < patch_hr || W < patch_hr)
    throw ConfigError("crop_pair: image " + pair.source + " smaller than patch");
  int64_t lp = patch_hr / scale;
  int64_t lh = pair.lr.shape[1], lw = pair.lr.shape[2];
  std::uniform_int_distribution<int64_t> di(0, lh - lp), dj(0, lw - lp);
  int64_t i = di(rng), j = dj(rng);

  ImagePair out;
  out.source = pair.source;
  out.lr = Tensor32({1, lp, lp});
  for (int64_t y = 0; y < lp; ++y)
    std::memcpy(out.lr.ptr() + y * lp, pair.lr.ptr() + (i + y) * lw + j, sizeof(float) * lp);
  out.hr = Tensor32({1, patch_hr, patch_hr});
  int64_t hi = i * scale, hj = j * scale;
  for (int64_t y = 0; y < patch_hr; ++y)
    std::memcpy(out.hr.ptr() + y * patch_hr, pair.hr.ptr() + (hi + y) * W + hj,
                sizeof(float) * patch_hr);
  return out;
}

Tensor32 rot90(const Tensor32& t) {
  int64_t H = t.shape[1], W = t.shape[2];
  Tensor32 out({1, W, H});
  for (int64_t y = 0; y < H; ++y)
    for (int64_t x = 0; x < W; ++x) out.ptr()[x * H + (H - 1 - y)] = t.ptr()[y * W + x];
  return out;
}

Tensor32 hflip(const Tensor32& t) {
  int64_t H = t.shape[1], W = t.shape[2];
  Tensor32 out({1, H, W});
  for (int64_t y = 0; y < H; ++y)
    for (int64_t x = 0; x < W; ++x) out.ptr()[y * W + (W - 1 - x)] = t.ptr()[y * W + x];
  return out;
}

void augment_pair(ImagePair& pair, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> rot(0, 3), flip(0, 1);
  int k = rot(rng);
  bool f = flip(rng) == 1;
  for (int i = 0; i < k; ++i) {
    pair.hr = rot90(pair.hr);
    pair.lr = rot90(pair.lr);
  }
  if (f) {
    pair.hr = hflip(pair.hr);
    pair.lr = hflip(pair.lr);
  }
}

Batch make_batch(const Dataset& ds, int batch, std::mt19937_64& rng) {
  if (batch < 1) throw ConfigError("make_batch: batch must be >= 1");
  if (ds.pairs().empty()) throw ConfigError("make_batch: empty dataset");
  // Sample only images that can host a full patch.
  std::vector<int> usable;
  for (size_t i = 0; i < ds.pairs().size(); ++i) {
    const auto& p = ds.pairs()[i];
    if (p.hr.shape[1] >= ds.patch() && p.hr.shape[2] >= ds.patch())
      usable.push_back(static_cast<int>(i));
  }
  if (usable.empty())
    throw ConfigError("make_batch: no image is at least " + std::to_string(ds.patch()) +
                      " pixels");
  int64_t lp = ds.patch() / ds.scale();
  Batch b;
  b.x = Tensor32({batch, 1, lp, lp});
  b.y = Tensor32({batch, 1, ds.patch(), ds.patch()});
  std::uniform_int_distribution<size_t> pick(0, usable.size() - 1);
  for (int n = 0; n < batch; ++n) {
    const ImagePair& src = ds.pairs()[static_cast<size_t>(usable[pick(rng)])];
    ImagePair sample = crop_pair(src, ds.patch(), ds.scale(), rng);
    augment_pair(sample, rng);
    std::memcpy(b.x.ptr() + static_cast<int64_t>(n) * lp * lp, sample.lr.ptr(),
                sizeof(float) * lp * lp);
    std::memcpy(b.y.ptr() + static_cast<int64_t>(n) * ds.patch() * ds.patch(),
                sample.hr.ptr(), sizeof(float) * ds.patch() * ds.patch());
  }
  return b;
}

}  // namespace pisr
