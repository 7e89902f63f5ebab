#include "warga/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "warga/linalg.hpp"

namespace warga {

namespace {

constexpr double kProbFloor = 1e-12;

// Stable per-pair weighted BCE with logits:
//   y=1: pos_weight * softplus(-l),  y=0: softplus(l)
inline double pair_loss(double logit, bool positive, double pos_weight) {
  return positive ? pos_weight * softplus(-logit) : softplus(logit);
}

// d(pair_loss)/d(logit), scaled later by norm / N^2.
inline double pair_grad(double logit, bool positive, double pos_weight) {
  const double s = sigmoid(logit);
  return positive ? pos_weight * (s - 1.0) : s;
}

}  // namespace

ReconWeighting ReconWeighting::balanced(const SpMatrix& target) {
  const double total = static_cast<double>(target.rows()) * static_cast<double>(target.cols());
  const double nnz = static_cast<double>(target.nonZeros());
  require_shape(nnz > 0.0 && nnz < total, "ReconWeighting: degenerate target");
  ReconWeighting w;
  w.pos_weight = (total - nnz) / nnz;
  w.norm = total / (2.0 * (total - nnz));
  return w;
}

SpMatrix recon_target(const SpMatrix& train_adjacency, bool include_diagonal) {
  if (!include_diagonal) return train_adjacency;
  SpMatrix t = train_adjacency;
  t += sparse_identity(train_adjacency.rows());
  t.makeCompressed();
  return t;
}

ReconResult recon_loss(const Matrix& logits, const SpMatrix& target,
                       const ReconWeighting& w) {
  require_shape(logits.rows() == target.rows() && logits.cols() == target.cols(),
                "recon_loss: logits/target shape mismatch");
  require_finite(logits, "recon_loss");

  const Index n = logits.rows();
  const double scale = w.norm / (static_cast<double>(n) * static_cast<double>(logits.cols()));
  ReconResult r;
  r.dlogits.resize(n, logits.cols());
  double loss = 0.0;
  for (Index i = 0; i < n; ++i) {
    SpMatrix::InnerIterator it(target, i);
    for (Index j = 0; j < logits.cols(); ++j) {
      bool pos = false;
      if (it && it.col() == j) {
        pos = it.value() != 0.0;
        ++it;
      }
      loss += pair_loss(logits(i, j), pos, w.pos_weight);
      r.dlogits(i, j) = scale * pair_grad(logits(i, j), pos, w.pos_weight);
    }
  }
  r.loss = scale * loss;
  return r;
}

ReconZResult recon_loss_grad_z(const Matrix& z, const SpMatrix& target,
                               const ReconWeighting& w, Index block_rows) {
  const Index n = z.rows();
  require_shape(target.rows() == n && target.cols() == n,
                "recon_loss_grad_z: target shape mismatch");
  require_shape(block_rows >= 1, "recon_loss_grad_z: bad block size");
  require_finite(z, "recon_loss_grad_z");

  const double scale = w.norm / (static_cast<double>(n) * static_cast<double>(n));
  ReconZResult r;
  r.dz = Matrix::Zero(n, z.cols());
  double loss = 0.0;

  for (Index start = 0; start < n; start += block_rows) {
    const Index rows = std::min(block_rows, n - start);
    Matrix block = z.middleRows(start, rows) * z.transpose();  // rows x n logits
    if (!block.allFinite()) throw NumericError("recon_loss_grad_z: non-finite logits");

    // Vectorized negative-class pass over the whole block, then per-entry
    // corrections for the (sparse) positives.
    auto l = block.array();
    Matrix exp_neg_abs = (-l.abs()).exp().matrix();
    loss += (exp_neg_abs.array().log1p() + l.max(0.0)).sum();
    Matrix grad = (l >= 0.0)
                      .select(1.0 / (1.0 + exp_neg_abs.array()),
                              exp_neg_abs.array() / (1.0 + exp_neg_abs.array()))
                      .matrix();
    for (Index bi = 0; bi < rows; ++bi) {
      for (SpMatrix::InnerIterator it(target, start + bi); it; ++it) {
        if (it.value() == 0.0) continue;
        const double lij = block(bi, it.col());
        loss += w.pos_weight * softplus(-lij) - softplus(lij);
        grad(bi, it.col()) = w.pos_weight * (sigmoid(lij) - 1.0);
      }
    }
    grad *= scale;
    // dZ = (G + G^T) Z accumulated blockwise.
    r.dz.middleRows(start, rows) += grad * z;
    r.dz.noalias() += grad.transpose() * z.middleRows(start, rows);
  }
  r.loss = scale * loss;
  return r;
}

KlResult kl_standard_normal(const Matrix& mu, const Matrix& logvar) {
  require_shape(mu.rows() == logvar.rows() && mu.cols() == logvar.cols(),
                "kl_standard_normal: shape mismatch");
  const double inv_n = 1.0 / static_cast<double>(mu.rows());
  KlResult r;
  r.loss = -0.5 * inv_n *
           (1.0 + logvar.array() - mu.array().square() - logvar.array().exp()).sum();
  r.dmu = (inv_n * mu.array()).matrix();
  r.dlogvar = (0.5 * inv_n * (logvar.array().exp() - 1.0)).matrix();
  return r;
}

AdvLosses adversarial_losses(const Vector& real_probs, const Vector& fake_probs) {
  const Index m_r = real_probs.size();
  const Index m_f = fake_probs.size();
  require_shape(m_r > 0 && m_f > 0, "adversarial_losses: empty batch");

  auto clamp = [](double p) {
    return std::min(std::max(p, kProbFloor), 1.0 - kProbFloor);
  };
  AdvLosses out;
  out.ddisc_real.resize(m_r);
  out.ddisc_fake.resize(m_f);
  out.dgen_fake.resize(m_f);
  for (Index i = 0; i < m_r; ++i) {
    const double p = clamp(real_probs(i));
    out.disc_loss -= std::log(p) / static_cast<double>(m_r);
    out.ddisc_real(i) = -1.0 / (static_cast<double>(m_r) * p);
  }
  for (Index i = 0; i < m_f; ++i) {
    const double p = clamp(fake_probs(i));
    out.disc_loss -= std::log1p(-p) / static_cast<double>(m_f);
    out.gen_loss -= std::log(p) / static_cast<double>(m_f);
    out.ddisc_fake(i) = 1.0 / (static_cast<double>(m_f) * (1.0 - p));
    out.dgen_fake(i) = -1.0 / (static_cast<double>(m_f) * p);
  }
  return out;
}

double wasserstein_dual_objective(const Matrix& r_batch, const Matrix& z_batch,
                                  const MlpParams& critic) {
  require_shape(r_batch.rows() == z_batch.rows(),
                "wasserstein_dual_objective: batch sizes differ");
  const Vector fr = critic_forward(r_batch, critic);
  const Vector fz = critic_forward(z_batch, critic);
  return fr.mean() - fz.mean();
}

DualGrads wasserstein_dual_with_grads(const Matrix& r_batch, const Matrix& z_batch,
                                      const MlpParams& critic) {
  require_shape(r_batch.rows() == z_batch.rows(),
                "wasserstein_dual_with_grads: batch sizes differ");
  const double inv_m = 1.0 / static_cast<double>(r_batch.rows());

  MlpCache r_cache, z_cache;
  const Vector fr = critic_forward(r_batch, critic, &r_cache);
  const Vector fz = critic_forward(z_batch, critic, &z_cache);
  const Vector ds = Vector::Constant(r_batch.rows(), inv_m);
  const MlpGrads gr = mlp_backward(r_cache, critic, ds);
  const MlpGrads gz = mlp_backward(z_cache, critic, ds);

  DualGrads out;
  out.value = fr.mean() - fz.mean();
  out.critic.w3 = gr.w3 - gz.w3;
  out.critic.b1 = gr.b1 - gz.b1;
  out.critic.w4 = gr.w4 - gz.w4;
  out.critic.b2 = gr.b2 - gz.b2;
  out.critic.w5 = gr.w5 - gz.w5;
  out.critic.b3 = gr.b3 - gz.b3;
  out.dz_batch = -gz.input;
  return out;
}

LossBreakdown warga_total_loss(double recon, double mean_critic_score_z, double lambda) {
  LossBreakdown b;
  b.reconstruction = recon;
  b.regularizer = lambda == 0.0 ? 0.0 : -lambda * mean_critic_score_z;
  b.total = b.reconstruction + b.regularizer;
  return b;
}

double w1_empirical_1d(const Vector& samples_a, const Vector& samples_b) {
  require_shape(samples_a.size() == samples_b.size(),
                "w1_empirical_1d: sample counts differ");
  std::vector<double> a(samples_a.data(), samples_a.data() + samples_a.size());
  std::vector<double> b(samples_b.data(), samples_b.data() + samples_b.size());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

}  // namespace warga
