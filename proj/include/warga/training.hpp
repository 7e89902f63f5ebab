#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "warga/graph.hpp"
#include "warga/models.hpp"
#include "warga/objectives.hpp"
#include "warga/types.hpp"

namespace warga {

enum class ModelKind { Warga, Gae, Vgae, Arga, Arvga };

std::string model_name(ModelKind kind);
ModelKind model_from_name(const std::string& name);

struct TrainConfig {
  ModelKind model = ModelKind::Warga;
  int epochs = 200;        // T
  int critic_iters = 5;    // K
  int batch_size = 0;      // m; 0 means full batch (m = N)
  int hidden_dim = 32;     // d
  int embed_dim = 16;      // e
  int critic_hidden1 = 16; // k
  int critic_hidden2 = 64; // l
  double encoder_lr = 1e-3;
  double critic_lr = 1e-3;
  double clip_bound = 0.01;
  double lambda = 1.0;     // regularizer weight; 0 reduces every model to plain GAE
  std::uint64_t seed = 0;
  Activation final_activation = Activation::Relu;
  bool use_pos_weight = true;
  bool include_diagonal = true;
  bool row_normalize_features = false;
  int val_every = 10;

  // Test hook: overrides the logvar head output of the variational models.
  std::optional<double> debug_force_logvar;

  void validate() const;
};

// Final parameters of whichever model was trained; unused members stay empty.
struct ModelParams {
  ModelKind kind = ModelKind::Warga;
  EncoderParams encoder;
  VariationalEncoderParams var_encoder;
  CriticParams critic;
  DiscriminatorParams discriminator;

  bool is_variational() const {
    return kind == ModelKind::Vgae || kind == ModelKind::Arvga;
  }
};

struct ValPoint {
  int epoch = 0;
  double auc = 0.0;
  double ap = 0.0;
};

struct TrainReport {
  std::vector<LossBreakdown> losses;  // one entry per epoch
  std::vector<ValPoint> val_history;
  std::vector<double> critic_maxabs;  // per critic iteration (WARGA only)
  double wall_seconds = 0.0;
  Matrix embedding;  // final Z
  ModelParams params;
  long generator_steps = 0;
  long critic_steps = 0;
};

// Row indices sampled uniformly with replacement; m == n returns 0..n-1
// without consuming the stream.
std::vector<Index> sample_rows(Index n, Index m, Rng& rng);

Matrix sample_embedding_batch(const Matrix& z, Index m, Rng& rng);

Matrix sample_prior_batch(const PriorSpec& spec, Index m, Rng& rng);

TrainReport train_warga(const Graph& g, const EdgeSplit& split, const TrainConfig& cfg);
TrainReport train_baseline(const Graph& g, const EdgeSplit& split, const TrainConfig& cfg);

// Dispatch on cfg.model.
TrainReport train(const Graph& g, const EdgeSplit& split, const TrainConfig& cfg);

// Deterministic encoder output for saved parameters (used by eval).
Matrix encode(const SpMatrix& a_norm, const Matrix& x, const ModelParams& params);

}  // namespace warga
