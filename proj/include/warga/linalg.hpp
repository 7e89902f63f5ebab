#pragma once

#include <cmath>

#include "warga/rng.hpp"
#include "warga/types.hpp"

namespace warga {

// Sparse-dense product, O(nnz(s) * d.cols()).
inline Matrix spmm(const SpMatrix& s, const Matrix& d) {
  require_shape(s.cols() == d.rows(), "spmm: inner dimensions " +
                                          std::to_string(s.cols()) + " vs " +
                                          std::to_string(d.rows()));
  return s * d;
}

// Dense-dense product.
inline Matrix gemm(const Matrix& a, const Matrix& b) {
  require_shape(a.cols() == b.rows(), "gemm: inner dimensions " +
                                          std::to_string(a.cols()) + " vs " +
                                          std::to_string(b.rows()));
  return a * b;
}

inline Matrix densify(const SpMatrix& s) { return Matrix(s); }

inline SpMatrix sparse_identity(Index n) {
  SpMatrix id(n, n);
  id.setIdentity();
  return id;
}

// Glorot-uniform init: i.i.d. uniform on [-sqrt(6/(rows+cols)), +...].
// Entries are drawn in row-major order.
inline Matrix glorot_init(Index rows, Index cols, Rng& rng) {
  require_shape(rows >= 1 && cols >= 1, "glorot_init: empty shape");
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix w(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) w(i, j) = rng.uniform(-limit, limit);
  return w;
}

// Standard-normal entries, drawn in row-major order.
inline Matrix normal_matrix(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite values");
}

}  // namespace warga
