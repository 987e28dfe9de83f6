// SPDX-License-Identifier: Apache-2.0
#include "pisr/losses.hpp"

namespace pisr {

namespace {
constexpr double kScaleFloor = 1e-6;
}

const char* distill_name(DistillKind k) {
  switch (k) {
    case DistillKind::None: return "none";
    case DistillKind::MAE: return "mae";
    case DistillKind::VID_Gaussian: return "vid-gaussian";
    case DistillKind::VID_Laplace: return "vid-laplace";
  }
  return "none";
}

DistillKind distill_from_name(const std::string& name) {
  if (name == "none") return DistillKind::None;
  if (name == "mae") return DistillKind::MAE;
  if (name == "vid-gaussian") return DistillKind::VID_Gaussian;
  if (name == "vid-laplace") return DistillKind::VID_Laplace;
  throw ConfigError("unknown distillation kind: " + name);
}

template <typename T>
Var mae(Tape<T>& tape, Var a, Var b) {
  return tape.mean(tape.abs(tape.sub(a, b)));
}

template <typename T>
Var vid_laplace(Tape<T>& tape, Var f_teacher, Var mu, Var b) {
  Var bf = tape.clamp_min(b, static_cast<T>(kScaleFloor));
  Var dist = tape.abs(tape.sub(f_teacher, mu));
  return tape.mean(tape.add(tape.log(bf), tape.div(dist, bf)));
}

template <typename T>
Var vid_gaussian(Tape<T>& tape, Var f_teacher, Var mu, Var sigma) {
  Var sf = tape.clamp_min(sigma, static_cast<T>(kScaleFloor));
  Var diff = tape.sub(f_teacher, mu);
  Var quad = tape.div(tape.mul(diff, diff), tape.mul_scalar(tape.mul(sf, sf), T(2)));
  return tape.mean(tape.add(tape.log(sf), quad));
}

template <typename T>
LossVars teacher_total(Tape<T>& tape, Var y, Var y_hat, Var x, Var x_hat, double lambda_t) {
  LossVars lv;
  lv.recon = mae(tape, y, y_hat);
  lv.aux = mae(tape, x, x_hat);
  lv.total = tape.add(lv.recon, tape.mul_scalar(lv.aux, static_cast<T>(lambda_t)));
  return lv;
}

template <typename T>
LossVars student_total(Tape<T>& tape, Var y, Var y_hat, DistillKind kind, double lambda_s,
                       Var f_teacher, Var f_student, Var mu, Var b) {
  LossVars lv;
  lv.recon = mae(tape, y, y_hat);
  switch (kind) {
    case DistillKind::None:
      lv.aux = tape.leaf(TensorT<T>::scalar(T(0)));
      lv.total = lv.recon;
      return lv;
    case DistillKind::MAE:
      if (!f_teacher.ok() || !f_student.ok())
        throw ContractError("student_total: MAE distillation needs both feature maps");
      lv.aux = mae(tape, f_teacher, f_student);
      break;
    case DistillKind::VID_Gaussian:
    case DistillKind::VID_Laplace:
      if (!f_teacher.ok() || !mu.ok() || !b.ok())
        throw ContractError("student_total: VID distillation needs estimator outputs");
      lv.aux = kind == DistillKind::VID_Laplace ? vid_laplace(tape, f_teacher, mu, b)
                                                : vid_gaussian(tape, f_teacher, mu, b);
      break;
  }
  lv.total = tape.add(lv.recon, tape.mul_scalar(lv.aux, static_cast<T>(lambda_s)));
  return lv;
}

#define PISR_INSTANTIATE_LOSSES(T)                                                       \
  template Var mae<T>(Tape<T>&, Var, Var);                                               \
  template Var vid_laplace<T>(Tape<T>&, Var, Var, Var);                                  \
  template Var vid_gaussian<T>(Tape<T>&, Var, Var, Var);                                 \
  template LossVars teacher_total<T>(Tape<T>&, Var, Var, Var, Var, double);              \
  template LossVars student_total<T>(Tape<T>&, Var, Var, DistillKind, double, Var, Var, \
                                     Var, Var);

PISR_INSTANTIATE_LOSSES(float)
PISR_INSTANTIATE_LOSSES(double)

}  // namespace pisr
