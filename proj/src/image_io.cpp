// SPDX-License-Identifier: Apache-2.0
#include "pisr/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

namespace pisr {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

Image8 load_png(FILE* f, const std::string& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed");
  }
  std::vector<png_bytep> rows;
  Image8 img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode PNG: " + path);
  }
  png_init_io(png, f);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unsupported PNG channel count in " + path);
  }
  img.w = static_cast<int>(w);
  img.h = static_cast<int>(h);
  img.channels = channels;
  img.pixels.resize(static_cast<size_t>(w) * h * channels);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y)
    rows[y] = img.pixels.data() + static_cast<size_t>(y) * w * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

uint32_t rd_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
int32_t rd_i32(const uint8_t* p) { return static_cast<int32_t>(rd_u32(p)); }
uint16_t rd_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

// Uncompressed 8-bit (palette) or 24-bit BMP, bottom-up or top-down rows.
Image8 load_bmp(FILE* f, const std::string& path) {
  std::fseek(f, 0, SEEK_END);
  long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  if (size < 54) throw IoError("BMP too small: " + path);
  std::vector<uint8_t> buf(static_cast<size_t>(size));
  if (std::fread(buf.data(), 1, buf.size(), f) != buf.size())
    throw IoError("short read on BMP: " + path);

  uint32_t data_off = rd_u32(&buf[10]);
  uint32_t hdr_size = rd_u32(&buf[14]);
  if (hdr_size < 40) throw IoError("unsupported BMP header in " + path);
  int32_t w = rd_i32(&buf[18]);
  int32_t h = rd_i32(&buf[22]);
  uint16_t bpp = rd_u16(&buf[28]);
  uint32_t compression = rd_u32(&buf[30]);
  if (compression != 0) throw IoError("compressed BMP not supported: " + path);
  if (bpp != 24 && bpp != 8) throw IoError("unsupported BMP bit depth in " + path);
  bool bottom_up = h > 0;
  int height = bottom_up ? h : -h;
  if (w <= 0 || height <= 0) throw IoError("bad BMP extents in " + path);

  const uint8_t* palette = nullptr;
  if (bpp == 8) {
    uint32_t colors = rd_u32(&buf[46]);
    if (colors == 0) colors = 256;
    palette = &buf[14 + hdr_size];
    if (14 + hdr_size + colors * 4 > data_off) throw IoError("bad BMP palette in " + path);
  }

  size_t row_stride = (static_cast<size_t>(w) * bpp / 8 + 3) & ~size_t(3);
  if (data_off + row_stride * height > buf.size())
    throw IoError("truncated BMP pixel data in " + path);

  Image8 img;
  img.w = w;
  img.h = height;
  img.channels = 3;
  img.pixels.resize(static_cast<size_t>(w) * height * 3);
  for (int y = 0; y < height; ++y) {
    int src_y = bottom_up ? height - 1 - y : y;
    const uint8_t* row = &buf[data_off + row_stride * src_y];
    for (int x = 0; x < w; ++x) {
      uint8_t r, g, b;
      if (bpp == 24) {
        b = row[x * 3 + 0];
        g = row[x * 3 + 1];
        r = row[x * 3 + 2];
      } else {
        const uint8_t* e = palette + row[x] * 4;
        b = e[0];
        g = e[1];
        r = e[2];
      }
      size_t o = (static_cast<size_t>(y) * w + x) * 3;
      img.pixels[o] = r;
      img.pixels[o + 1] = g;
      img.pixels[o + 2] = b;
    }
  }
  return img;
}

}  // namespace

Image8 load_image(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open image: " + path);
  uint8_t sig[8] = {0};
  size_t got = std::fread(sig, 1, sizeof(sig), f.get());
  std::fseek(f.get(), 0, SEEK_SET);
  if (got >= 8 && png_sig_cmp(sig, 0, 8) == 0) return load_png(f.get(), path);
  if (got >= 2 && sig[0] == 'B' && sig[1] == 'M') return load_bmp(f.get(), path);
  throw IoError("unsupported image format: " + path);
}

void save_png_gray(const std::string& path, int w, int h, const uint8_t* data) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode PNG: " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y)
    png_write_row(png, const_cast<png_bytep>(data + static_cast<size_t>(y) * w));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Tensor32 to_luminance(const Image8& img) {
  Tensor32 t({1, img.h, img.w});
  float* out = t.ptr();
  if (img.channels == 1) {
    for (size_t i = 0; i < img.pixels.size(); ++i) out[i] = img.pixels[i] / 255.0f;
    return t;
  }
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      double r = img.at(y, x, 0) / 255.0;
      double g = img.at(y, x, 1) / 255.0;
      double b = img.at(y, x, 2) / 255.0;
      double yy = (16.0 + 65.481 * r + 128.553 * g + 24.966 * b) / 255.0;
      if (yy < 0.0) yy = 0.0;
      if (yy > 1.0) yy = 1.0;
      out[static_cast<size_t>(y) * img.w + x] = static_cast<float>(yy);
    }
  return t;
}

Tensor32 load_luminance(const std::string& path) { return to_luminance(load_image(path)); }

void save_gray_tensor(const std::string& path, const Tensor32& t) {
  if (t.rank() != 3 || t.shape[0] != 1)
    throw ConfigError("save_gray_tensor: expected [1,H,W], got " + shape_str(t.shape));
  int h = static_cast<int>(t.shape[1]);
  int w = static_cast<int>(t.shape[2]);
  std::vector<uint8_t> bytes(static_cast<size_t>(w) * h);
  const float* p = t.ptr();
  for (size_t i = 0; i < bytes.size(); ++i) {
    float v = p[i];
    if (v < 0.0f) v = 0.0f;
    if (v > 1.0f) v = 1.0f;
    bytes[i] = static_cast<uint8_t>(std::floor(v * 255.0f + 0.5f));
  }
  save_png_gray(path, w, h, bytes.data());
}

}  // namespace pisr
