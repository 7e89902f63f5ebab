#pragma once

#include "warga/models.hpp"
#include "warga/types.hpp"

namespace warga {

// Target distribution for the latent embedding: standard normal of width e.
struct PriorSpec {
  Index dim = 16;
};

struct LossBreakdown {
  double reconstruction = 0.0;
  double regularizer = 0.0;
  double total = 0.0;
};

// Class weighting for the reconstruction cross-entropy. With nnz positive
// pairs out of N^2: pos_weight = (N^2 - nnz)/nnz, norm = N^2 / (2 (N^2 - nnz)).
// Sparse graphs collapse to the all-zero predictor without it.
struct ReconWeighting {
  double pos_weight = 1.0;
  double norm = 1.0;

  static ReconWeighting unweighted() { return {}; }
  static ReconWeighting balanced(const SpMatrix& target);
};

// Reconstruction label matrix: the training adjacency, plus the diagonal by
// default so self-links are trained toward 1.
SpMatrix recon_target(const SpMatrix& train_adjacency, bool include_diagonal = true);

struct ReconResult {
  double loss = 0.0;
  Matrix dlogits;
};

// Mean weighted binary cross-entropy over all N^2 pairs, from explicit logits.
ReconResult recon_loss(const Matrix& logits, const SpMatrix& target,
                       const ReconWeighting& w);

struct ReconZResult {
  double loss = 0.0;
  Matrix dz;
};

// Same loss taken directly from embeddings (logits = Z Z^T), evaluated in
// fixed-size row blocks so the N x N logits are never materialized at once.
ReconZResult recon_loss_grad_z(const Matrix& z, const SpMatrix& target,
                               const ReconWeighting& w, Index block_rows = 512);

struct KlResult {
  double loss = 0.0;
  Matrix dmu;
  Matrix dlogvar;
};

// KL( N(mu, diag exp(logvar)) || N(0, I) ), closed form, averaged over nodes.
KlResult kl_standard_normal(const Matrix& mu, const Matrix& logvar);

struct AdvLosses {
  double disc_loss = 0.0;
  double gen_loss = 0.0;
  Vector ddisc_real;  // d disc_loss / d real probs
  Vector ddisc_fake;  // d disc_loss / d fake probs
  Vector dgen_fake;   // d gen_loss  / d fake probs
};

// Discriminator loss -E[log D(r)] - E[log(1 - D(z))]; generator loss
// -E[log D(z)] (non-saturating). Probabilities are clamped at 1e-12 from
// both ends before the logs.
AdvLosses adversarial_losses(const Vector& real_probs, const Vector& fake_probs);

// Batch estimate mean f(r) - mean f(z). The critic ascends this, the
// generator descends it through the z batch only.
double wasserstein_dual_objective(const Matrix& r_batch, const Matrix& z_batch,
                                  const MlpParams& critic);

struct DualGrads {
  double value = 0.0;  // mean f(r) - mean f(z)
  MlpGrads critic;     // d value / d phi
  Matrix dz_batch;     // d value / d z batch rows
};

// The r-side and z-side gradients are accumulated separately and subtracted,
// so identical batches cancel to exact zeros.
DualGrads wasserstein_dual_with_grads(const Matrix& r_batch, const Matrix& z_batch,
                                      const MlpParams& critic);

// Generator-facing combination: total = recon - lambda * mean f(z). The
// E[f(r)] term is constant in the encoder weights and enters only the critic
// update.
LossBreakdown warga_total_loss(double recon, double mean_critic_score_z, double lambda);

// Exact 1-D empirical W1: mean |sorted_a[i] - sorted_b[i]|.
double w1_empirical_1d(const Vector& samples_a, const Vector& samples_b);

}  // namespace warga
