// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pisr/tape.hpp"

namespace pisr {

enum class DistillKind { None, MAE, VID_Gaussian, VID_Laplace };

const char* distill_name(DistillKind k);
DistillKind distill_from_name(const std::string& name);

struct LossWeights {
  double lambda_t = 1e-4;
  double lambda_s = 1e-6;
  DistillKind distill = DistillKind::VID_Laplace;
};

// Handles to the per-step objective terms on one tape: the reconstruction
// term, the auxiliary term (imitation or distillation), and the weighted
// total that backward() runs on.
struct LossVars {
  Var recon;
  Var aux;
  Var total;
};

struct LossReport {
  double recon = 0.0;
  double aux = 0.0;
  double total = 0.0;
};

template <typename T>
LossReport report(const Tape<T>& tape, const LossVars& lv) {
  return {static_cast<double>(tape.scalar(lv.recon)), static_cast<double>(tape.scalar(lv.aux)),
          static_cast<double>(tape.scalar(lv.total))};
}

// Mean absolute error over all elements.
template <typename T>
Var mae(Tape<T>& tape, Var a, Var b);

// Laplace negative log-likelihood without constants:
// mean(log b + |f - mu| / b). The scale map is floored at 1e-6 before the
// log and division (softplus can underflow at 32-bit).
template <typename T>
Var vid_laplace(Tape<T>& tape, Var f_teacher, Var mu, Var b);

// Gaussian variant: mean(log sigma + (f - mu)^2 / (2 sigma^2)), constants
// dropped.
template <typename T>
Var vid_gaussian(Tape<T>& tape, Var f_teacher, Var mu, Var sigma);

// recon + lambda_t * imitation; both terms reach the encoder.
template <typename T>
LossVars teacher_total(Tape<T>& tape, Var y, Var y_hat, Var x, Var x_hat, double lambda_t);

// recon + lambda_s * distill. The teacher feature must enter the tape as a
// leaf (detached); mu/b are required only for the VID kinds, f_student only
// for MAE.
template <typename T>
LossVars student_total(Tape<T>& tape, Var y, Var y_hat, DistillKind kind, double lambda_s,
                       Var f_teacher, Var f_student, Var mu, Var b);

}  // namespace pisr
