#pragma once

#include "warga/rng.hpp"
#include "warga/types.hpp"

namespace warga {

enum class Activation { Relu, Linear };

// Two-layer GCN encoder: Z = act(A_norm ReLU(A_norm X W1) W2).
// The final activation is ReLU by default, with a linear variant behind the
// config flag.
struct EncoderParams {
  Matrix w1;  // c x d
  Matrix w2;  // d x e
  Activation final_activation = Activation::Relu;
};

// Shared first layer, separate mu / logvar heads on the second.
struct VariationalEncoderParams {
  Matrix w1;         // c x d
  Matrix w2_mu;      // d x e
  Matrix w2_logvar;  // d x e
};

// Two-hidden-layer MLP scorer: w5 sigma(w4 sigma(w3 z + b1) + b2) + b3.
// b1, b2 are column vectors; b3 is a 1x1 tensor so every parameter takes the
// same optimizer/serialization path.
struct MlpParams {
  Matrix w3;  // k x e
  Matrix b1;  // k x 1
  Matrix w4;  // l x k
  Matrix b2;  // l x 1
  Matrix w5;  // 1 x l
  Matrix b3;  // 1 x 1
};

struct CriticParams : MlpParams {
  double clip_bound = 0.01;
};

// Same shape family as the critic, sigmoid output head, never clipped.
struct DiscriminatorParams : MlpParams {};

// Glorot weights, zero biases.
MlpParams init_mlp(Index in_dim, Index hidden1, Index hidden2, Rng& rng);

struct GcnCache {
  Matrix ax;      // A_norm * X
  Matrix h1_pre;  // ax * W1
  Matrix h1;      // ReLU(h1_pre)
  Matrix ah1;     // A_norm * h1
  Matrix h2_pre;  // ah1 * W2
};

Matrix gcn_forward(const SpMatrix& a_norm, const Matrix& x, const EncoderParams& p,
                   GcnCache* cache = nullptr);
// Variant reusing a precomputed A_norm * X (constant across a training run).
Matrix gcn_forward_from_ax(const SpMatrix& a_norm, const Matrix& ax,
                           const EncoderParams& p, GcnCache* cache = nullptr);

struct GcnGrads {
  Matrix w1;
  Matrix w2;
};

GcnGrads gcn_backward(const SpMatrix& a_norm, const GcnCache& cache,
                      const EncoderParams& p, const Matrix& dz);

// Link logits L = Z Z^T; probabilities are sigmoid(L) downstream.
Matrix decode_logits(const Matrix& z);

struct MlpCache {
  Matrix input;  // m x e
  Matrix h1;     // m x k, post-sigmoid
  Matrix h2;     // m x l, post-sigmoid
  Vector score;  // m, pre-sigmoid for the discriminator
};

// Scores, one per batch row (linear output head).
Vector critic_forward(const Matrix& batch, const MlpParams& p, MlpCache* cache = nullptr);

struct MlpGrads {
  Matrix w3, b1, w4, b2, w5, b3;
  Matrix input;  // gradient w.r.t. the batch rows
};

// Gradients of sum_i dscore[i] * score_i w.r.t. parameters and input.
MlpGrads mlp_backward(const MlpCache& cache, const MlpParams& p, const Vector& dscore);

// Probabilities in (0,1): sigmoid over critic-style scores.
Vector discriminator_forward(const Matrix& batch, const DiscriminatorParams& p,
                             MlpCache* cache = nullptr);

// Chains dL/dprob through the output sigmoid, then the shared MLP backward.
MlpGrads discriminator_backward(const MlpCache& cache, const DiscriminatorParams& p,
                                const Vector& dprob);

// Per-entry clamp of every critic tensor (biases included) to [-c, +c].
void clip_params(CriticParams& p);

double max_abs_param(const MlpParams& p);

// Analytic Lipschitz bound for a clipped critic: each sigmoid contributes a
// 1/4 derivative factor and each weight's operator norm is bounded by its
// Frobenius norm with all entries at the clip bound.
double critic_lipschitz_bound(const CriticParams& p);

struct VariationalCache {
  Matrix ax, h1_pre, h1, ah1;
  Matrix mu, logvar, eps;
};

// Reparameterized sample Z = mu + exp(logvar / 2) .* eps, eps ~ N(0, I).
Matrix variational_forward(const SpMatrix& a_norm, const Matrix& x,
                           const VariationalEncoderParams& p, Rng& rng,
                           VariationalCache* cache = nullptr);
Matrix variational_forward_from_ax(const SpMatrix& a_norm, const Matrix& ax,
                                   const VariationalEncoderParams& p, Rng& rng,
                                   VariationalCache* cache = nullptr);

struct VariationalGrads {
  Matrix w1, w2_mu, w2_logvar;
};

// dz flows through the sample; dmu_extra / dlogvar_extra carry direct terms
// (the KL gradients).
VariationalGrads variational_backward(const SpMatrix& a_norm, const VariationalCache& cache,
                                      const VariationalEncoderParams& p, const Matrix& dz,
                                      const Matrix& dmu_extra, const Matrix& dlogvar_extra);

}  // namespace warga
