#include "warga/training.hpp"

#include <chrono>
#include <cmath>

#include "warga/adam.hpp"
#include "warga/evaluation.hpp"
#include "warga/linalg.hpp"

namespace warga {

namespace {

constexpr double kProbFloor = 1e-12;

Matrix gather_rows(const Matrix& z, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), z.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Index>(i)) = z.row(rows[i]);
  return out;
}

// Adam states for the six MLP tensors, in the fixed update order.
struct MlpOptimizer {
  AdamState w3, b1, w4, b2, w5, b3;

  MlpOptimizer(const MlpParams& p, double lr)
      : w3(AdamState::for_param(p.w3, lr)),
        b1(AdamState::for_param(p.b1, lr)),
        w4(AdamState::for_param(p.w4, lr)),
        b2(AdamState::for_param(p.b2, lr)),
        w5(AdamState::for_param(p.w5, lr)),
        b3(AdamState::for_param(p.b3, lr)) {}

  void descend(MlpParams& p, const MlpGrads& g) {
    adam_step(p.w3, g.w3, w3);
    adam_step(p.b1, g.b1, b1);
    adam_step(p.w4, g.w4, w4);
    adam_step(p.b2, g.b2, b2);
    adam_step(p.w5, g.w5, w5);
    adam_step(p.b3, g.b3, b3);
  }

  void ascend(MlpParams& p, const MlpGrads& g) {
    adam_step(p.w3, Matrix(-g.w3), w3);
    adam_step(p.b1, Matrix(-g.b1), b1);
    adam_step(p.w4, Matrix(-g.w4), w4);
    adam_step(p.b2, Matrix(-g.b2), b2);
    adam_step(p.w5, Matrix(-g.w5), w5);
    adam_step(p.b3, Matrix(-g.b3), b3);
  }
};

// Shared per-run state: normalized training adjacency, the precomputed
// A_norm * X product, the reconstruction target and its weighting.
struct RunSetup {
  SpMatrix a_norm;
  Matrix ax;
  SpMatrix target;
  ReconWeighting weighting;
  Index n = 0;
  Index m = 0;  // samples per batch
};

RunSetup prepare_run(const Graph& g, const EdgeSplit& split, const TrainConfig& cfg) {
  RunSetup s;
  s.a_norm = normalize_adjacency(split.train_adjacency).matrix;
  Matrix x = cfg.row_normalize_features ? row_normalize(g.features) : g.features;
  s.ax = spmm(s.a_norm, x);
  s.target = recon_target(split.train_adjacency, cfg.include_diagonal);
  s.weighting = cfg.use_pos_weight ? ReconWeighting::balanced(s.target)
                                   : ReconWeighting::unweighted();
  s.n = g.n_nodes;
  s.m = cfg.batch_size > 0 ? cfg.batch_size : s.n;
  return s;
}

void check_term_finite(double value, const char* term) {
  if (!std::isfinite(value))
    throw NumericError(std::string("non-finite ") + term);
}

// Re-raise numeric failures with the epoch attached.
template <class Body>
void epoch_guard(int epoch, Body&& body) {
  try {
    body();
  } catch (const NumericError& e) {
    throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
  }
}

void record_validation(TrainReport& report, const Matrix& z_eval, const EdgeSplit& split,
                       int epoch, int val_every, int epochs) {
  if (epoch % val_every != 0 && epoch != epochs) return;
  const ScoredEdges scored = score_edges(z_eval, split.val_pos, split.val_neg);
  report.val_history.push_back({epoch, auc(scored), average_precision(scored)});
}

}  // namespace

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Warga: return "warga";
    case ModelKind::Gae: return "gae";
    case ModelKind::Vgae: return "vgae";
    case ModelKind::Arga: return "arga";
    case ModelKind::Arvga: return "arvga";
  }
  return "unknown";
}

ModelKind model_from_name(const std::string& name) {
  if (name == "warga") return ModelKind::Warga;
  if (name == "gae") return ModelKind::Gae;
  if (name == "vgae") return ModelKind::Vgae;
  if (name == "arga") return ModelKind::Arga;
  if (name == "arvga") return ModelKind::Arvga;
  throw ValidationError("unknown model '" + name + "'");
}

void TrainConfig::validate() const {
  require_shape(epochs >= 1, "TrainConfig: epochs >= 1");
  require_shape(critic_iters >= 1, "TrainConfig: critic_iters >= 1");
  require_shape(batch_size >= 0, "TrainConfig: batch_size >= 0");
  require_shape(hidden_dim >= 1 && embed_dim >= 1, "TrainConfig: widths >= 1");
  require_shape(critic_hidden1 >= 1 && critic_hidden2 >= 1, "TrainConfig: critic widths >= 1");
  require_shape(encoder_lr > 0.0 && critic_lr > 0.0, "TrainConfig: learning rates > 0");
  require_shape(clip_bound > 0.0, "TrainConfig: clip_bound > 0");
  require_shape(lambda >= 0.0, "TrainConfig: lambda >= 0");
  require_shape(val_every >= 1, "TrainConfig: val_every >= 1");
}

std::vector<Index> sample_rows(Index n, Index m, Rng& rng) {
  require_shape(n >= 1 && m >= 1, "sample_rows: need n, m >= 1");
  std::vector<Index> rows(static_cast<std::size_t>(m));
  if (m == n) {
    for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    return rows;
  }
  for (Index i = 0; i < m; ++i)
    rows[static_cast<std::size_t>(i)] =
        static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
  return rows;
}

Matrix sample_embedding_batch(const Matrix& z, Index m, Rng& rng) {
  if (m == z.rows()) return z;
  return gather_rows(z, sample_rows(z.rows(), m, rng));
}

Matrix sample_prior_batch(const PriorSpec& spec, Index m, Rng& rng) {
  require_shape(spec.dim >= 1 && m >= 1, "sample_prior_batch: need dim, m >= 1");
  return normal_matrix(m, spec.dim, rng);
}

TrainReport train_warga(const Graph& g, const EdgeSplit& split, const TrainConfig& cfg) {
  cfg.validate();
  require_shape(cfg.model == ModelKind::Warga, "train_warga: wrong model tag");
  const auto t0 = std::chrono::steady_clock::now();

  RunSetup s = prepare_run(g, split, cfg);
  Rng rng(cfg.seed);

  // Initialization order is fixed: W1, W2, then the critic tensors, so that
  // the encoder draws match a GAE run with the same seed.
  EncoderParams enc;
  enc.w1 = glorot_init(g.features.cols(), cfg.hidden_dim, rng);
  enc.w2 = glorot_init(cfg.hidden_dim, cfg.embed_dim, rng);
  enc.final_activation = cfg.final_activation;
  CriticParams critic;
  static_cast<MlpParams&>(critic) =
      init_mlp(cfg.embed_dim, cfg.critic_hidden1, cfg.critic_hidden2, rng);
  critic.clip_bound = cfg.clip_bound;

  AdamState opt_w1 = AdamState::for_param(enc.w1, cfg.encoder_lr);
  AdamState opt_w2 = AdamState::for_param(enc.w2, cfg.encoder_lr);
  MlpOptimizer opt_critic(critic, cfg.critic_lr);

  TrainReport report;
  report.losses.reserve(cfg.epochs);
  report.critic_maxabs.reserve(static_cast<std::size_t>(cfg.epochs) * cfg.critic_iters);
  const PriorSpec prior{cfg.embed_dim};

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    epoch_guard(epoch, [&] {
      GcnCache cache;
      Matrix z = gcn_forward_from_ax(s.a_norm, s.ax, enc, &cache);

      // Inner loop: K critic ascent steps on mean f(r) - mean f(z), clipping
      // after every update.
      for (int k = 0; k < cfg.critic_iters; ++k) {
        Matrix r = sample_prior_batch(prior, s.m, rng);
        Matrix zb = gather_rows(z, sample_rows(s.n, s.m, rng));
        DualGrads dual = wasserstein_dual_with_grads(r, zb, critic);
        opt_critic.ascend(critic, dual.critic);
        clip_params(critic);
        report.critic_maxabs.push_back(max_abs_param(critic));
        ++report.critic_steps;
      }

      // Generator step on recon - lambda * mean f(z).
      ReconZResult rec = recon_loss_grad_z(z, s.target, s.weighting);
      check_term_finite(rec.loss, "reconstruction loss");
      Matrix dz = std::move(rec.dz);
      double mean_fz = 0.0;
      if (cfg.lambda != 0.0) {
        const std::vector<Index> rows = sample_rows(s.n, s.m, rng);
        Matrix zg = gather_rows(z, rows);
        MlpCache gc;
        Vector scores = critic_forward(zg, critic, &gc);
        mean_fz = scores.mean();
        Vector dsg = Vector::Constant(s.m, -cfg.lambda / static_cast<double>(s.m));
        MlpGrads gg = mlp_backward(gc, critic, dsg);
        for (std::size_t i = 0; i < rows.size(); ++i)
          dz.row(rows[i]) += gg.input.row(static_cast<Index>(i));
      }
      const LossBreakdown lb = warga_total_loss(rec.loss, mean_fz, cfg.lambda);
      check_term_finite(lb.regularizer, "Wasserstein regularizer");

      GcnGrads eg = gcn_backward(s.a_norm, cache, enc, dz);
      adam_step(enc.w1, eg.w1, opt_w1);
      adam_step(enc.w2, eg.w2, opt_w2);
      ++report.generator_steps;

      report.losses.push_back(lb);
      record_validation(report, z, split, epoch, cfg.val_every, cfg.epochs);
    });
  }

  report.embedding = gcn_forward_from_ax(s.a_norm, s.ax, enc);
  report.params.kind = ModelKind::Warga;
  report.params.encoder = std::move(enc);
  report.params.critic = std::move(critic);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

TrainReport train_baseline(const Graph& g, const EdgeSplit& split, const TrainConfig& cfg) {
  cfg.validate();
  require_shape(cfg.model != ModelKind::Warga, "train_baseline: use train_warga");
  const auto t0 = std::chrono::steady_clock::now();

  RunSetup s = prepare_run(g, split, cfg);
  Rng rng(cfg.seed);
  const bool variational = cfg.model == ModelKind::Vgae || cfg.model == ModelKind::Arvga;
  const bool adversarial = cfg.model == ModelKind::Arga || cfg.model == ModelKind::Arvga;

  EncoderParams enc;
  VariationalEncoderParams venc;
  if (variational) {
    venc.w1 = glorot_init(g.features.cols(), cfg.hidden_dim, rng);
    venc.w2_mu = glorot_init(cfg.hidden_dim, cfg.embed_dim, rng);
    venc.w2_logvar = glorot_init(cfg.hidden_dim, cfg.embed_dim, rng);
  } else {
    enc.w1 = glorot_init(g.features.cols(), cfg.hidden_dim, rng);
    enc.w2 = glorot_init(cfg.hidden_dim, cfg.embed_dim, rng);
    enc.final_activation = cfg.final_activation;
  }
  DiscriminatorParams disc;
  if (adversarial)
    static_cast<MlpParams&>(disc) =
        init_mlp(cfg.embed_dim, cfg.critic_hidden1, cfg.critic_hidden2, rng);

  AdamState opt_w1 = AdamState::for_param(variational ? venc.w1 : enc.w1, cfg.encoder_lr);
  AdamState opt_w2 =
      AdamState::for_param(variational ? venc.w2_mu : enc.w2, cfg.encoder_lr);
  AdamState opt_w2_logvar =
      variational ? AdamState::for_param(venc.w2_logvar, cfg.encoder_lr) : AdamState{};
  std::optional<MlpOptimizer> opt_disc;
  if (adversarial) opt_disc.emplace(disc, cfg.critic_lr);

  TrainReport report;
  report.losses.reserve(cfg.epochs);
  const PriorSpec prior{cfg.embed_dim};

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    epoch_guard(epoch, [&] {
      GcnCache cache;
      VariationalCache vcache;
      Matrix z;
      if (variational) {
        z = variational_forward_from_ax(s.a_norm, s.ax, venc, rng, &vcache);
        if (cfg.debug_force_logvar) {
          vcache.logvar = Matrix::Constant(z.rows(), z.cols(), *cfg.debug_force_logvar);
          z = (vcache.mu.array() +
               (0.5 * vcache.logvar.array()).exp() * vcache.eps.array())
                  .matrix();
        }
      } else {
        z = gcn_forward_from_ax(s.a_norm, s.ax, enc, &cache);
      }

      double regularizer = 0.0;

      // One discriminator update per epoch, mirroring the critic loop with K=1.
      if (adversarial && cfg.lambda != 0.0) {
        Matrix r = sample_prior_batch(prior, s.m, rng);
        Matrix zb = gather_rows(z, sample_rows(s.n, s.m, rng));
        MlpCache mc_real, mc_fake;
        Vector p_real = discriminator_forward(r, disc, &mc_real);
        Vector p_fake = discriminator_forward(zb, disc, &mc_fake);
        AdvLosses adv = adversarial_losses(p_real, p_fake);
        check_term_finite(adv.disc_loss, "discriminator loss");
        MlpGrads g_real = discriminator_backward(mc_real, disc, adv.ddisc_real);
        MlpGrads g_fake = discriminator_backward(mc_fake, disc, adv.ddisc_fake);
        MlpGrads g_sum;
        g_sum.w3 = g_real.w3 + g_fake.w3;
        g_sum.b1 = g_real.b1 + g_fake.b1;
        g_sum.w4 = g_real.w4 + g_fake.w4;
        g_sum.b2 = g_real.b2 + g_fake.b2;
        g_sum.w5 = g_real.w5 + g_fake.w5;
        g_sum.b3 = g_real.b3 + g_fake.b3;
        opt_disc->descend(disc, g_sum);
        ++report.critic_steps;
      }

      ReconZResult rec = recon_loss_grad_z(z, s.target, s.weighting);
      check_term_finite(rec.loss, "reconstruction loss");
      Matrix dz = std::move(rec.dz);

      // Generator-side adversarial term: -lambda E[log D(z)].
      if (adversarial && cfg.lambda != 0.0) {
        const std::vector<Index> rows = sample_rows(s.n, s.m, rng);
        Matrix zg = gather_rows(z, rows);
        MlpCache mg;
        Vector pg = discriminator_forward(zg, disc, &mg);
        double gen_loss = 0.0;
        Vector dprob(pg.size());
        for (Index i = 0; i < pg.size(); ++i) {
          const double p = std::min(std::max(pg(i), kProbFloor), 1.0 - kProbFloor);
          gen_loss -= std::log(p) / static_cast<double>(s.m);
          dprob(i) = -cfg.lambda / (static_cast<double>(s.m) * p);
        }
        regularizer += cfg.lambda * gen_loss;
        MlpGrads gg = discriminator_backward(mg, disc, dprob);
        for (std::size_t i = 0; i < rows.size(); ++i)
          dz.row(rows[i]) += gg.input.row(static_cast<Index>(i));
      }

      if (variational) {
        KlResult kl = kl_standard_normal(vcache.mu, vcache.logvar);
        Matrix dmu_extra = Matrix::Zero(vcache.mu.rows(), vcache.mu.cols());
        Matrix dlv_extra = dmu_extra;
        if (cfg.lambda != 0.0) {
          regularizer += cfg.lambda * kl.loss;
          dmu_extra = cfg.lambda * kl.dmu;
          dlv_extra = cfg.lambda * kl.dlogvar;
        }
        check_term_finite(regularizer, "KL term");
        VariationalGrads vg =
            variational_backward(s.a_norm, vcache, venc, dz, dmu_extra, dlv_extra);
        adam_step(venc.w1, vg.w1, opt_w1);
        adam_step(venc.w2_mu, vg.w2_mu, opt_w2);
        adam_step(venc.w2_logvar, vg.w2_logvar, opt_w2_logvar);
      } else {
        GcnGrads eg = gcn_backward(s.a_norm, cache, enc, dz);
        adam_step(enc.w1, eg.w1, opt_w1);
        adam_step(enc.w2, eg.w2, opt_w2);
      }
      ++report.generator_steps;

      LossBreakdown lb;
      lb.reconstruction = rec.loss;
      lb.regularizer = regularizer;
      lb.total = rec.loss + regularizer;
      check_term_finite(lb.total, "total loss");
      report.losses.push_back(lb);

      // Variational models validate on the deterministic mean embedding.
      record_validation(report, variational ? vcache.mu : z, split, epoch, cfg.val_every,
                        cfg.epochs);
    });
  }

  report.params.kind = cfg.model;
  if (variational) {
    report.params.var_encoder = venc;
  } else {
    report.params.encoder = enc;
  }
  if (adversarial) report.params.discriminator = disc;
  report.embedding = encode(s.a_norm, cfg.row_normalize_features
                                          ? row_normalize(g.features)
                                          : g.features,
                            report.params);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

TrainReport train(const Graph& g, const EdgeSplit& split, const TrainConfig& cfg) {
  return cfg.model == ModelKind::Warga ? train_warga(g, split, cfg)
                                       : train_baseline(g, split, cfg);
}

Matrix encode(const SpMatrix& a_norm, const Matrix& x, const ModelParams& params) {
  if (params.is_variational()) {
    // Deterministic mean path of the variational encoder.
    EncoderParams mu_head;
    mu_head.w1 = params.var_encoder.w1;
    mu_head.w2 = params.var_encoder.w2_mu;
    mu_head.final_activation = Activation::Linear;
    return gcn_forward(a_norm, x, mu_head);
  }
  return gcn_forward(a_norm, x, params.encoder);
}

}  // namespace warga
