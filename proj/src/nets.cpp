// SPDX-License-Identifier: Apache-2.0
#include "pisr/nets.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace pisr {

void FsrcnnConfig::validate() const {
  if (scale < 2 || scale > 4) throw ConfigError("fsrcnn: scale must be in {2,3,4}");
  if (s < 1 || d < s) throw ConfigError("fsrcnn: need d >= s >= 1");
  if (m < 1) throw ConfigError("fsrcnn: need m >= 1");
}

std::string FsrcnnConfig::fingerprint() const {
  std::ostringstream os;
  os << "fsrcnn(scale=" << scale << ",d=" << d << ",s=" << s << ",m=" << m << ")";
  return os.str();
}

void EncoderConfig::validate() const {
  if (scale < 2 || scale > 4) throw ConfigError("encoder: scale must be in {2,3,4}");
  if (c1 < 1 || c2 < 1 || c3 < 1) throw ConfigError("encoder: channel widths must be >= 1");
}

std::string EncoderConfig::fingerprint() const {
  std::ostringstream os;
  os << "hgenc(scale=" << scale << ",c1=" << c1 << ",c2=" << c2 << ",c3=" << c3
     << ",final_act=" << (final_act ? 1 : 0) << ")";
  return os.str();
}

std::string EstimatorConfig::fingerprint() const {
  std::ostringstream os;
  os << "estimator(d=" << d << ")";
  return os.str();
}

namespace {

// Zero-mean Gaussian with std sqrt(2 / (kh*kw*fan_in)), the PReLU-aware
// scheme; biases zero, PReLU slopes 0.25.
template <typename T>
void init_conv(Param<T>& w, std::mt19937_64& rng, int64_t fan_in_spatial) {
  std::normal_distribution<double> dist(0.0,
                                        std::sqrt(2.0 / static_cast<double>(fan_in_spatial)));
  for (auto& v : w.value.data) v = static_cast<T>(dist(rng));
}

template <typename T>
void add_conv_block(ParamSet<T>& ps, const std::string& prefix, int64_t cin, int64_t cout,
                    int64_t k, bool prelu, std::mt19937_64& rng) {
  auto& w = ps.add(prefix + ".weight", {cout, cin, k, k});
  init_conv(w, rng, cin * k * k);
  ps.add(prefix + ".bias", {cout});
  if (prelu) {
    auto& a = ps.add(prefix + ".slope", {cout});
    a.value.fill(T(0.25));
  }
}

}  // namespace

template <typename T>
StudentNet<T> build_student(const FsrcnnConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  StudentNet<T> net;
  net.cfg = cfg;
  auto& ps = net.params;
  add_conv_block(ps, "feature", 1, cfg.d, 5, true, rng);
  add_conv_block(ps, "shrink", cfg.d, cfg.s, 1, true, rng);
  for (int i = 0; i < cfg.m; ++i)
    add_conv_block(ps, "mapping." + std::to_string(i), cfg.s, cfg.s, 3, true, rng);
  add_conv_block(ps, "expanding", cfg.s, cfg.d, 1, true, rng);
  auto& dw = ps.add("deconv.weight", {cfg.d, 1, 9, 9});
  init_conv(dw, rng, static_cast<int64_t>(cfg.d) * 9 * 9);
  ps.add("deconv.bias", {1});
  return net;
}

template <typename T>
TeacherEncoder<T> build_encoder(const EncoderConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  TeacherEncoder<T> net;
  net.cfg = cfg;
  auto& ps = net.params;
  add_conv_block(ps, "enc.0", 1, cfg.c1, 5, true, rng);
  add_conv_block(ps, "enc.1", cfg.c1, cfg.c2, 5, true, rng);
  add_conv_block(ps, "enc.2", cfg.c2, cfg.c3, 3, true, rng);
  add_conv_block(ps, "enc.3", cfg.c3, 1, 3, cfg.final_act, rng);
  return net;
}

template <typename T>
FlatTeacher<T> build_flat_teacher(const FsrcnnConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  FlatTeacher<T> net;
  net.cfg = cfg;
  auto& ps = net.params;
  add_conv_block(ps, "feature", 1, cfg.d, 5, true, rng);
  add_conv_block(ps, "shrink", cfg.d, cfg.s, 1, true, rng);
  for (int i = 0; i < cfg.m; ++i)
    add_conv_block(ps, "mapping." + std::to_string(i), cfg.s, cfg.s, 3, true, rng);
  add_conv_block(ps, "expanding", cfg.s, cfg.d, 1, true, rng);
  add_conv_block(ps, "final", cfg.d, 1, 9, false, rng);
  return net;
}

template <typename T>
EstimatorNet<T> build_estimator(const EstimatorConfig& cfg, std::mt19937_64& rng) {
  if (cfg.d < 1) throw ConfigError("estimator: d must be >= 1");
  EstimatorNet<T> net;
  net.cfg = cfg;
  auto& ps = net.params;
  add_conv_block(ps, "loc.0", cfg.d, cfg.d, 1, true, rng);
  add_conv_block(ps, "loc.1", cfg.d, cfg.d, 1, false, rng);
  add_conv_block(ps, "scale.0", cfg.d, cfg.d, 1, true, rng);
  add_conv_block(ps, "scale.1", cfg.d, cfg.d, 1, false, rng);
  return net;
}

namespace {

// Runs "conv + PReLU" given the index of the block's first parameter in the
// bound var list. Returns the activated value and advances the cursor.
template <typename T>
Var conv_prelu(Tape<T>& tape, const Bound& b, size_t& cursor, Var x, Conv2dGeom g) {
  Var w = b.vars[cursor++];
  Var bias = b.vars[cursor++];
  Var slope = b.vars[cursor++];
  return tape.prelu(tape.conv2d(x, w, bias, g), slope);
}

}  // namespace

template <typename T>
StudentOut student_forward(Tape<T>& tape, const StudentNet<T>& net, const Bound& b, Var x) {
  const auto& xv = tape.val(x);
  if (xv.rank() != 4 || xv.shape[1] != 1)
    throw ConfigError("student_forward: expected [N,1,H,W] input, got " + shape_str(xv.shape));
  size_t c = 0;
  Var h = conv_prelu(tape, b, c, x, {1, 2});
  h = conv_prelu(tape, b, c, h, {1, 0});
  for (int i = 0; i < net.cfg.m; ++i) h = conv_prelu(tape, b, c, h, {1, 1});
  Var feat = conv_prelu(tape, b, c, h, {1, 0});
  Var w = b.vars[c++];
  Var bias = b.vars[c++];
  Var y = tape.conv_transpose2d(feat, w, bias,
                                {net.cfg.scale, 4, net.cfg.scale - 1});
  return {y, feat};
}

template <typename T>
Var encoder_forward(Tape<T>& tape, const TeacherEncoder<T>& net, const Bound& b, Var y) {
  const auto& yv = tape.val(y);
  if (yv.rank() != 4 || yv.shape[1] != 1)
    throw ConfigError("encoder_forward: expected [N,1,H,W] input, got " + shape_str(yv.shape));
  if (yv.shape[2] % net.cfg.scale != 0 || yv.shape[3] % net.cfg.scale != 0)
    throw ConfigError("encoder_forward: HR extents " + shape_str(yv.shape) +
                      " not divisible by scale " + std::to_string(net.cfg.scale));
  size_t c = 0;
  Var h = conv_prelu(tape, b, c, y, {1, 2});
  h = conv_prelu(tape, b, c, h, {net.cfg.scale, 2});
  h = conv_prelu(tape, b, c, h, {1, 1});
  if (net.cfg.final_act) {
    h = conv_prelu(tape, b, c, h, {1, 1});
  } else {
    Var w = b.vars[c++];
    Var bias = b.vars[c++];
    h = tape.conv2d(h, w, bias, {1, 1});
  }
  return h;
}

template <typename T>
StudentOut flat_forward(Tape<T>& tape, const FlatTeacher<T>& net, const Bound& b, Var y) {
  size_t c = 0;
  Var h = conv_prelu(tape, b, c, y, {1, 2});
  h = conv_prelu(tape, b, c, h, {1, 0});
  for (int i = 0; i < net.cfg.m; ++i) h = conv_prelu(tape, b, c, h, {1, 1});
  Var feat = conv_prelu(tape, b, c, h, {1, 0});
  Var w = b.vars[c++];
  Var bias = b.vars[c++];
  Var out = tape.conv2d(feat, w, bias, {1, 4});
  return {out, feat};
}

template <typename T>
EstimatorOut estimator_forward(Tape<T>& tape, const EstimatorNet<T>& net, const Bound& b,
                                  Var feat) {
  const auto& fv = tape.val(feat);
  if (fv.rank() != 4 || fv.shape[1] != net.cfg.d)
    throw ConfigError("estimator_forward: expected " + std::to_string(net.cfg.d) +
                      " channels, got " + shape_str(fv.shape));
  size_t c = 0;
  Var h = conv_prelu(tape, b, c, feat, {1, 0});
  Var mu = tape.conv2d(h, b.vars[c], b.vars[c + 1], {1, 0});
  c += 2;
  Var h2 = conv_prelu(tape, b, c, feat, {1, 0});
  Var raw = tape.conv2d(h2, b.vars[c], b.vars[c + 1], {1, 0});
  return {mu, tape.softplus(raw)};
}

template <typename T>
void transfer_weights(const StudentNet<T>& decoder, StudentNet<T>& student) {
  if (!(decoder.cfg == student.cfg))
    throw ContractError("transfer_weights: architecture mismatch " +
                        decoder.cfg.fingerprint() + " vs " + student.cfg.fingerprint());
  const auto& src = decoder.params.all();
  auto& dst = student.params.all();
  for (size_t i = 0; i < src.size(); ++i) {
    if (src[i].name != dst[i].name || src[i].value.shape != dst[i].value.shape)
      throw ContractError("transfer_weights: parameter layout mismatch at " + src[i].name);
    dst[i].value.data = src[i].value.data;
  }
}

int64_t student_multiadds(const FsrcnnConfig& cfg, int64_t out_h, int64_t out_w) {
  cfg.validate();
  int64_t lr = (out_h / cfg.scale) * (out_w / cfg.scale);
  int64_t hr = out_h * out_w;
  int64_t total = 0;
  total += lr * cfg.d * (5 * 5 * 1);
  total += lr * cfg.s * (1 * 1 * cfg.d);
  total += static_cast<int64_t>(cfg.m) * lr * cfg.s * (3 * 3 * cfg.s);
  total += lr * cfg.d * (1 * 1 * cfg.s);
  total += hr * 1 * (9 * 9 * cfg.d);
  return total;
}

template <typename T>
TensorT<T> avg_pool(const TensorT<T>& x, int k) {
  if (x.rank() != 4 || x.shape[2] % k != 0 || x.shape[3] % k != 0)
    throw ConfigError("avg_pool: extents " + shape_str(x.shape) + " not divisible by " +
                      std::to_string(k));
  int64_t N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  int64_t oh = H / k, ow = W / k;
  TensorT<T> out({N, C, oh, ow});
  T inv = T(1) / static_cast<T>(k * k);
  for (int64_t n = 0; n < N; ++n)
    for (int64_t c = 0; c < C; ++c)
      for (int64_t i = 0; i < oh; ++i)
        for (int64_t j = 0; j < ow; ++j) {
          T acc = 0;
          for (int di = 0; di < k; ++di)
            for (int dj = 0; dj < k; ++dj) acc += x.at4(n, c, i * k + di, j * k + dj);
          out.at4(n, c, i, j) = acc * inv;
        }
  return out;
}

template <typename T>
uint64_t param_checksum(const ParamSet<T>& ps) {
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](const void* p, size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& p : ps.all()) {
    mix(p.name.data(), p.name.size());
    mix(p.value.data.data(), p.value.data.size() * sizeof(T));
  }
  return h;
}

#define PISR_INSTANTIATE_NETS(T)                                                          \
  template StudentNet<T> build_student<T>(const FsrcnnConfig&, std::mt19937_64&);         \
  template TeacherEncoder<T> build_encoder<T>(const EncoderConfig&, std::mt19937_64&);    \
  template FlatTeacher<T> build_flat_teacher<T>(const FsrcnnConfig&, std::mt19937_64&);   \
  template EstimatorNet<T> build_estimator<T>(const EstimatorConfig&, std::mt19937_64&);  \
  template StudentOut student_forward<T>(Tape<T>&, const StudentNet<T>&, const Bound&,    \
                                         Var);                                         \
  template Var encoder_forward<T>(Tape<T>&, const TeacherEncoder<T>&, const Bound&, Var); \
  template StudentOut flat_forward<T>(Tape<T>&, const FlatTeacher<T>&, const Bound&,      \
                                      Var);                                            \
  template EstimatorOut estimator_forward<T>(Tape<T>&, const EstimatorNet<T>&,            \
                                             const Bound&, Var);                       \
  template void transfer_weights<T>(const StudentNet<T>&, StudentNet<T>&);                \
  template TensorT<T> avg_pool<T>(const TensorT<T>&, int);                                \
  template uint64_t param_checksum<T>(const ParamSet<T>&);

PISR_INSTANTIATE_NETS(float)
PISR_INSTANTIATE_NETS(double)

}  // namespace pisr
