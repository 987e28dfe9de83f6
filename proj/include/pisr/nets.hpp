// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <random>
#include <string>

#include "pisr/tape.hpp"

namespace pisr {

// Named parameter with its gradient buffer. Names are unique within a net,
// e.g. "mapping.2.weight".
template <typename T>
struct Param {
  std::string name;
  TensorT<T> value;
  TensorT<T> grad;
};

template <typename T>
class ParamSet {
 public:
  Param<T>& add(const std::string& name, std::vector<int64_t> shape) {
    for (const auto& p : params_)
      if (p.name == name) throw ContractError("duplicate parameter name: " + name);
    params_.push_back(Param<T>{name, TensorT<T>(shape), TensorT<T>(std::move(shape))});
    return params_.back();
  }
  Param<T>* find(const std::string& name) {
    for (auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }
  std::vector<Param<T>>& all() { return params_; }
  const std::vector<Param<T>>& all() const { return params_; }
  size_t size() const { return params_.size(); }

  int64_t count_params() const {
    int64_t n = 0;
    for (const auto& p : params_) n += p.value.numel();
    return n;
  }

 private:
  std::vector<Param<T>> params_;
};

// Parameters pushed onto a tape as leaves, in ParamSet order.
struct Bound {
  std::vector<Var> vars;
};

template <typename T>
Bound bind_params(Tape<T>& tape, const ParamSet<T>& ps) {
  Bound b;
  b.vars.reserve(ps.size());
  for (const auto& p : ps.all()) b.vars.push_back(tape.leaf(p.value));
  return b;
}

template <typename T>
void pull_grads(const Tape<T>& tape, const Bound& b, ParamSet<T>& ps) {
  for (size_t i = 0; i < ps.size(); ++i) ps.all()[i].grad = tape.grad(b.vars[i]);
}

// FSRCNN geometry: feature extraction (5x5, 1->d), shrinking (1x1, d->s),
// m mapping blocks (3x3, s->s), expanding (1x1, s->d), deconvolution
// (9x9, d->1, stride=scale, pad=4, out_pad=scale-1). PReLU after every conv
// except the deconvolution.
struct FsrcnnConfig {
  int scale = 2;
  int d = 56;
  int s = 12;
  int m = 4;

  void validate() const;
  std::string fingerprint() const;
  bool operator==(const FsrcnnConfig&) const = default;
};

// Hourglass encoder: 4 conv+PReLU blocks, kernels 5,5,3,3; block 2 uses
// stride=scale to bring HR down to LR size; output is a single channel.
struct EncoderConfig {
  int scale = 2;
  int c1 = 64;
  int c2 = 64;
  int c3 = 32;
  bool final_act = true;

  void validate() const;
  std::string fingerprint() const;
  bool operator==(const EncoderConfig&) const = default;
};

template <typename T>
struct StudentNet {
  FsrcnnConfig cfg;
  ParamSet<T> params;
};

template <typename T>
struct TeacherEncoder {
  EncoderConfig cfg;
  ParamSet<T> params;
};

// Teacher variant without the hourglass: FSRCNN stages on the HR grid with
// the deconvolution replaced by a size-preserving 9x9 convolution.
template <typename T>
struct FlatTeacher {
  FsrcnnConfig cfg;  // scale records the nominal factor; all convs stride 1
  ParamSet<T> params;
};

// Location/scale estimator: two parallel branches of 1x1 conv -> PReLU ->
// 1x1 conv over the student's d-channel feature map; the scale branch ends
// in softplus so b stays positive.
struct EstimatorConfig {
  int d = 56;
  std::string fingerprint() const;
  bool operator==(const EstimatorConfig&) const = default;
};

template <typename T>
struct EstimatorNet {
  EstimatorConfig cfg;
  ParamSet<T> params;
};

template <typename T>
StudentNet<T> build_student(const FsrcnnConfig& cfg, std::mt19937_64& rng);
template <typename T>
TeacherEncoder<T> build_encoder(const EncoderConfig& cfg, std::mt19937_64& rng);
template <typename T>
FlatTeacher<T> build_flat_teacher(const FsrcnnConfig& cfg, std::mt19937_64& rng);
template <typename T>
EstimatorNet<T> build_estimator(const EstimatorConfig& cfg, std::mt19937_64& rng);

// Reconstruction plus the expanding-module feature tap (the distillation
// feature), both on the same tape.
struct StudentOut {
  Var y_hat;
  Var feat;
};

struct EstimatorOut {
  Var mu;
  Var b;
};

template <typename T>
StudentOut student_forward(Tape<T>& tape, const StudentNet<T>& net, const Bound& b, Var x);
template <typename T>
Var encoder_forward(Tape<T>& tape, const TeacherEncoder<T>& net, const Bound& b, Var y);
template <typename T>
StudentOut flat_forward(Tape<T>& tape, const FlatTeacher<T>& net, const Bound& b, Var y);
template <typename T>
EstimatorOut estimator_forward(Tape<T>& tape, const EstimatorNet<T>& net, const Bound& b,
                               Var feat);

// Copies every decoder parameter into the student (bitwise). Architectures
// must match exactly.
template <typename T>
void transfer_weights(const StudentNet<T>& decoder, StudentNet<T>& student);

// Multiply-accumulate count to produce an out_h x out_w reconstruction;
// the deconvolution is counted at HR resolution with all kernel taps.
int64_t student_multiadds(const FsrcnnConfig& cfg, int64_t out_h, int64_t out_w);

// Mean over non-overlapping k x k blocks; used to bring HR-resolution flat
// teacher features down to the student's LR grid.
template <typename T>
TensorT<T> avg_pool(const TensorT<T>& x, int k);

template <typename T>
uint64_t param_checksum(const ParamSet<T>& ps);

}  // namespace pisr
