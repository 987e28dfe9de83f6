// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>

#include "pisr/nets.hpp"

namespace pisr {

// PSNR in dB on the luminance channel: crop `shave` pixels from each border,
// rescale to [0,255], 10*log10(255^2 / MSE). Identical inputs report the
// documented 100 dB cap.
template <typename T>
double psnr(const TensorT<T>& ref, const TensorT<T>& test, int shave);

// Single-scale SSIM, 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
// L=255, averaged over valid window positions after shaving.
template <typename T>
double ssim(const TensorT<T>& ref, const TensorT<T>& test, int shave);

struct EvalItem {
  std::string file;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::vector<EvalItem> items;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  int shave = 0;
};

// Prediction for one image; receives the HR reference (cropped to a scale
// multiple) and its cached bicubic LR, returns the reconstruction to score.
using Predictor = std::function<Tensor32(const Tensor32& hr, const Tensor32& lr)>;

// Scores every PNG/BMP in a folder (sorted by file name). LR inputs are
// synthesized with the data module's degradation.
EvalReport evaluate_folder(const std::string& hr_folder, int scale, int shave, bool antialias,
                           const Predictor& pred);

void write_report_csv(const std::string& path, const EvalReport& r);

// Forward-only helpers on [1,H,W] luminance tensors, output clamped to
// [0,1].
Tensor32 run_student(const StudentNet<float>& net, const Tensor32& lr);
Tensor32 run_student_feat(const StudentNet<float>& net, const Tensor32& lr, Tensor32* feat);
Tensor32 bicubic_upscale(const Tensor32& lr, int scale);

// SR of one image file written as 8-bit PNG (round-half-away quantization).
void infer(const StudentNet<float>& net, const std::string& lr_path,
           const std::string& out_path);

}  // namespace pisr
