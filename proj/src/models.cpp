#include "warga/models.hpp"

#include <cmath>

#include "warga/linalg.hpp"

namespace warga {

namespace {

inline Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

// 1 where pre-activation is positive, else 0.
inline Matrix relu_gate(const Matrix& pre) {
  return pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

}  // namespace

MlpParams init_mlp(Index in_dim, Index hidden1, Index hidden2, Rng& rng) {
  MlpParams p;
  p.w3 = glorot_init(hidden1, in_dim, rng);
  p.w4 = glorot_init(hidden2, hidden1, rng);
  p.w5 = glorot_init(1, hidden2, rng);
  p.b1 = Matrix::Zero(hidden1, 1);
  p.b2 = Matrix::Zero(hidden2, 1);
  p.b3 = Matrix::Zero(1, 1);
  return p;
}

Matrix gcn_forward(const SpMatrix& a_norm, const Matrix& x, const EncoderParams& p,
                   GcnCache* cache) {
  return gcn_forward_from_ax(a_norm, spmm(a_norm, x), p, cache);
}

Matrix gcn_forward_from_ax(const SpMatrix& a_norm, const Matrix& ax,
                           const EncoderParams& p, GcnCache* cache) {
  require_shape(a_norm.rows() == ax.rows(), "gcn_forward: A/X row mismatch");
  require_shape(ax.cols() == p.w1.rows(), "gcn_forward: X/W1 shape mismatch");
  require_shape(p.w1.cols() == p.w2.rows(), "gcn_forward: W1/W2 shape mismatch");

  Matrix h1_pre = gemm(ax, p.w1);
  Matrix h1 = relu(h1_pre);
  Matrix ah1 = spmm(a_norm, h1);
  Matrix h2_pre = gemm(ah1, p.w2);
  Matrix z = p.final_activation == Activation::Relu ? relu(h2_pre) : h2_pre;
  if (cache) {
    cache->ax = ax;
    cache->h1_pre = std::move(h1_pre);
    cache->h1 = std::move(h1);
    cache->ah1 = std::move(ah1);
    cache->h2_pre = std::move(h2_pre);
  }
  return z;
}

GcnGrads gcn_backward(const SpMatrix& a_norm, const GcnCache& cache,
                      const EncoderParams& p, const Matrix& dz) {
  require_shape(dz.rows() == cache.h2_pre.rows() && dz.cols() == cache.h2_pre.cols(),
                "gcn_backward: dZ shape mismatch");

  Matrix dh2_pre = p.final_activation == Activation::Relu
                       ? Matrix(dz.cwiseProduct(relu_gate(cache.h2_pre)))
                       : dz;
  GcnGrads g;
  g.w2 = gemm(Matrix(cache.ah1.transpose()), dh2_pre);
  Matrix dah1 = gemm(dh2_pre, Matrix(p.w2.transpose()));
  Matrix dh1 = a_norm.transpose() * dah1;
  Matrix dh1_pre = dh1.cwiseProduct(relu_gate(cache.h1_pre));
  g.w1 = gemm(Matrix(cache.ax.transpose()), dh1_pre);
  return g;
}

Matrix decode_logits(const Matrix& z) { return z * z.transpose(); }

Vector critic_forward(const Matrix& batch, const MlpParams& p, MlpCache* cache) {
  require_shape(batch.cols() == p.w3.cols(), "critic_forward: batch width " +
                                                 std::to_string(batch.cols()) +
                                                 " vs w3 input " +
                                                 std::to_string(p.w3.cols()));
  Matrix h1 = sigmoid(Matrix((batch * p.w3.transpose()).rowwise() +
                             p.b1.col(0).transpose()));
  Matrix h2 = sigmoid(Matrix((h1 * p.w4.transpose()).rowwise() +
                             p.b2.col(0).transpose()));
  Vector score = ((h2 * p.w5.transpose()).col(0).array() + p.b3(0, 0)).matrix();
  if (cache) {
    cache->input = batch;
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
    cache->score = score;
  }
  return score;
}

MlpGrads mlp_backward(const MlpCache& cache, const MlpParams& p, const Vector& dscore) {
  require_shape(dscore.size() == cache.input.rows(),
                "mlp_backward: upstream size mismatch");

  MlpGrads g;
  g.b3 = Matrix::Constant(1, 1, dscore.sum());
  g.w5 = dscore.transpose() * cache.h2;                       // 1 x l
  Matrix dh2 = dscore * p.w5;                                 // m x l
  Matrix da2 = dh2.cwiseProduct(cache.h2)
                   .cwiseProduct((1.0 - cache.h2.array()).matrix());
  g.w4 = da2.transpose() * cache.h1;                          // l x k
  g.b2 = da2.colwise().sum().transpose();                     // l x 1
  Matrix dh1 = da2 * p.w4;                                    // m x k
  Matrix da1 = dh1.cwiseProduct(cache.h1)
                   .cwiseProduct((1.0 - cache.h1.array()).matrix());
  g.w3 = da1.transpose() * cache.input;                       // k x e
  g.b1 = da1.colwise().sum().transpose();                     // k x 1
  g.input = da1 * p.w3;                                       // m x e
  return g;
}

Vector discriminator_forward(const Matrix& batch, const DiscriminatorParams& p,
                             MlpCache* cache) {
  Vector score = critic_forward(batch, p, cache);
  return score.unaryExpr([](double s) { return sigmoid(s); });
}

MlpGrads discriminator_backward(const MlpCache& cache, const DiscriminatorParams& p,
                                const Vector& dprob) {
  Vector prob = cache.score.unaryExpr([](double s) { return sigmoid(s); });
  Vector dscore = (dprob.array() * prob.array() * (1.0 - prob.array())).matrix();
  return mlp_backward(cache, p, dscore);
}

void clip_params(CriticParams& p) {
  const double c = p.clip_bound;
  auto clamp = [c](Matrix& m) { m = m.cwiseMax(-c).cwiseMin(c); };
  clamp(p.w3);
  clamp(p.b1);
  clamp(p.w4);
  clamp(p.b2);
  clamp(p.w5);
  clamp(p.b3);
}

double max_abs_param(const MlpParams& p) {
  double m = 0.0;
  for (const Matrix* t : {&p.w3, &p.b1, &p.w4, &p.b2, &p.w5, &p.b3})
    m = std::max(m, t->cwiseAbs().maxCoeff());
  return m;
}

double critic_lipschitz_bound(const CriticParams& p) {
  const double c = p.clip_bound;
  const double k = static_cast<double>(p.w3.rows());
  const double e = static_cast<double>(p.w3.cols());
  const double l = static_cast<double>(p.w4.rows());
  return c * c * c * std::sqrt(k * e) * std::sqrt(l * k) * std::sqrt(l) / 16.0;
}

Matrix variational_forward(const SpMatrix& a_norm, const Matrix& x,
                           const VariationalEncoderParams& p, Rng& rng,
                           VariationalCache* cache) {
  return variational_forward_from_ax(a_norm, spmm(a_norm, x), p, rng, cache);
}

Matrix variational_forward_from_ax(const SpMatrix& a_norm, const Matrix& ax,
                                   const VariationalEncoderParams& p, Rng& rng,
                                   VariationalCache* cache) {
  require_shape(ax.cols() == p.w1.rows(), "variational_forward: X/W1 shape mismatch");
  require_shape(p.w1.cols() == p.w2_mu.rows() && p.w1.cols() == p.w2_logvar.rows(),
                "variational_forward: W1/W2 shape mismatch");

  Matrix h1_pre = gemm(ax, p.w1);
  Matrix h1 = relu(h1_pre);
  Matrix ah1 = spmm(a_norm, h1);
  Matrix mu = gemm(ah1, p.w2_mu);
  Matrix logvar = gemm(ah1, p.w2_logvar);
  Matrix eps = normal_matrix(mu.rows(), mu.cols(), rng);
  Matrix z = (mu.array() + (0.5 * logvar.array()).exp() * eps.array()).matrix();
  if (cache) {
    cache->ax = ax;
    cache->h1_pre = std::move(h1_pre);
    cache->h1 = std::move(h1);
    cache->ah1 = std::move(ah1);
    cache->mu = std::move(mu);
    cache->logvar = std::move(logvar);
    cache->eps = std::move(eps);
  }
  return z;
}

VariationalGrads variational_backward(const SpMatrix& a_norm, const VariationalCache& cache,
                                      const VariationalEncoderParams& p, const Matrix& dz,
                                      const Matrix& dmu_extra, const Matrix& dlogvar_extra) {
  // Z = mu + exp(logvar/2) .* eps
  Matrix std_dev = (0.5 * cache.logvar.array()).exp().matrix();
  Matrix dmu = dz + dmu_extra;
  Matrix dlogvar =
      (0.5 * dz.array() * cache.eps.array() * std_dev.array()).matrix() + dlogvar_extra;

  VariationalGrads g;
  g.w2_mu = gemm(Matrix(cache.ah1.transpose()), dmu);
  g.w2_logvar = gemm(Matrix(cache.ah1.transpose()), dlogvar);
  Matrix dah1 = gemm(dmu, Matrix(p.w2_mu.transpose())) +
                gemm(dlogvar, Matrix(p.w2_logvar.transpose()));
  Matrix dh1 = a_norm.transpose() * dah1;
  Matrix dh1_pre = dh1.cwiseProduct(relu_gate(cache.h1_pre));
  g.w1 = gemm(Matrix(cache.ax.transpose()), dh1_pre);
  return g;
}

}  // namespace warga
