// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "pisr/tensor.hpp"

namespace pisr {

// 8-bit interleaved image, 1 (gray) or 3 (RGB) channels.
struct Image8 {
  int w = 0;
  int h = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;

  uint8_t at(int y, int x, int c) const {
    return pixels[(static_cast<size_t>(y) * w + x) * channels + c];
  }
};

// PNG or BMP, dispatched on the file signature.
Image8 load_image(const std::string& path);

void save_png_gray(const std::string& path, int w, int h, const uint8_t* data);

// ITU-R BT.601 luma: Y' = 16 + 65.481 R + 128.553 G + 24.966 B with RGB in
// [0,1]; result rescaled by /255 into [0,1]. Grayscale images pass through
// as value/255.
Tensor32 to_luminance(const Image8& img);
Tensor32 load_luminance(const std::string& path);

// Clamp to [0,1] and quantize with round-half-away-from-zero.
void save_gray_tensor(const std::string& path, const Tensor32& t);

}  // namespace pisr
