// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <string>

#include "pisr/tensor.hpp"

namespace pisr {

// Aligned HR / bicubic-LR luminance pair; HR extents are divisible by the
// scale and LR extents are exactly HR / scale.
struct ImagePair {
  Tensor32 hr;
  Tensor32 lr;
  std::string source;
};

// Plain-text manifest: header line "scale=<k> patch=<n>", then one HR image
// path per line (resolved relative to the manifest's directory).
struct Manifest {
  int scale = 2;
  int patch = 192;
  std::vector<std::string> files;
};

Manifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, int scale, int patch,
                    const std::vector<std::string>& files);

// Loads every manifest image once, crops HR to a scale multiple and caches
// the bicubic degradation, so all training stages see identical LR data.
class Dataset {
 public:
  Dataset(const Manifest& m, bool antialias = true);

  int scale() const { return scale_; }
  int patch() const { return patch_; }
  const std::vector<ImagePair>& pairs() const { return pairs_; }
  // Images large enough for one patch.
  size_t usable() const { return usable_; }

 private:
  int scale_;
  int patch_;
  size_t usable_ = 0;
  std::vector<ImagePair> pairs_;
};

// Random aligned crop: the LR window is drawn uniformly and the HR window is
// its scale multiple, so the two stay in exact correspondence.
ImagePair crop_pair(const ImagePair& pair, int patch_hr, int scale, std::mt19937_64& rng);

// One of 8 dihedral transforms (90-degree rotations x optional horizontal
// flip), identical on both members.
void augment_pair(ImagePair& pair, std::mt19937_64& rng);

Tensor32 rot90(const Tensor32& t);
Tensor32 hflip(const Tensor32& t);

struct Batch {
  Tensor32 x;  // [N,1,patch/scale,patch/scale]
  Tensor32 y;  // [N,1,patch,patch]
};

// Independently sampled, cropped and augmented pairs. Fully determined by
// the rng state; the trainer derives one stream per batch index so any
// prefetch topology reproduces the same sequence.
Batch make_batch(const Dataset& ds, int batch, std::mt19937_64& rng);

}  // namespace pisr
