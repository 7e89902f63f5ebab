#pragma once

#include <cmath>

#include "warga/linalg.hpp"
#include "warga/types.hpp"

namespace warga {

// Bias-corrected Adam. One state per parameter tensor; moment tensors share
// the parameter's shape and the step counter advances by one per update.
struct AdamState {
  Matrix m;
  Matrix v;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_param(const Matrix& p, double lr) {
    AdamState s;
    s.m = Matrix::Zero(p.rows(), p.cols());
    s.v = Matrix::Zero(p.rows(), p.cols());
    s.lr = lr;
    return s;
  }
};

inline void adam_step(Matrix& param, const Matrix& grad, AdamState& st) {
  require_shape(param.rows() == grad.rows() && param.cols() == grad.cols(),
                "adam_step: parameter/gradient shape mismatch");
  require_shape(st.m.rows() == param.rows() && st.m.cols() == param.cols(),
                "adam_step: state belongs to a different parameter");
  if (!grad.allFinite()) throw NumericError("adam_step: non-finite gradient");

  st.step += 1;
  st.m = st.beta1 * st.m + (1.0 - st.beta1) * grad;
  st.v.array() = st.beta2 * st.v.array() + (1.0 - st.beta2) * grad.array().square();
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  param.array() -=
      st.lr * (st.m.array() / bc1) / ((st.v.array() / bc2).sqrt() + st.eps);
}

}  // namespace warga
