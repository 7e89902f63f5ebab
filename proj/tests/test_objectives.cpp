#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "warga/graph.hpp"
#include "warga/linalg.hpp"
#include "warga/objectives.hpp"

using namespace warga;
namespace oracle = warga::testing;

namespace {

// Scalar reference for the weighted BCE, straight from the definition.
double pairwise_recon_oracle(const Matrix& logits, const Matrix& dense_target,
                             const ReconWeighting& w) {
  double loss = 0.0;
  for (Index i = 0; i < logits.rows(); ++i) {
    for (Index j = 0; j < logits.cols(); ++j) {
      const double p = sigmoid(logits(i, j));
      if (dense_target(i, j) != 0.0)
        loss += -w.pos_weight * std::log(p);
      else
        loss += -std::log1p(-p);
    }
  }
  return w.norm * loss / static_cast<double>(logits.size());
}

SpMatrix half_ones_target(Index n) {
  // Checkerboard: exactly half the n^2 entries are 1.
  std::vector<Eigen::Triplet<double>> trips;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if ((i + j) % 2 == 0) trips.emplace_back(i, j, 1.0);
  SpMatrix t(n, n);
  t.setFromTriplets(trips.begin(), trips.end());
  return t;
}

CriticParams small_critic(std::uint64_t seed, Index e) {
  Rng rng(seed);
  CriticParams p;
  static_cast<MlpParams&>(p) = init_mlp(e, 4, 6, rng);
  p.b1 = normal_matrix(4, 1, rng) * 0.1;
  p.b2 = normal_matrix(6, 1, rng) * 0.1;
  p.b3 = normal_matrix(1, 1, rng) * 0.1;
  return p;
}

}  // namespace

TEST_CASE("recon_loss: zero logits on a half-ones target give ln 2") {
  const Index n = 4;
  Matrix logits = Matrix::Zero(n, n);
  ReconResult r = recon_loss(logits, half_ones_target(n), ReconWeighting::unweighted());
  CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("recon_loss: saturated perfect logits vanish") {
  Graph g = oracle::tiny_test_graph(1);
  SpMatrix target = recon_target(g.adjacency, true);
  Matrix logits(g.n_nodes, g.n_nodes);
  for (Index i = 0; i < logits.rows(); ++i)
    for (Index j = 0; j < logits.cols(); ++j)
      logits(i, j) = target.coeff(i, j) != 0.0 ? 40.0 : -40.0;
  ReconResult r = recon_loss(logits, target, ReconWeighting::balanced(target));
  CHECK(r.loss >= 0.0);
  CHECK(r.loss < 1e-10);
}

TEST_CASE("recon_loss matches the pairwise oracle and finite differences") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Graph g = oracle::tiny_test_graph(seed, 5);
    SpMatrix target = recon_target(g.adjacency, true);
    ReconWeighting w = ReconWeighting::balanced(target);
    Rng rng(seed + 50);
    Matrix logits = normal_matrix(g.n_nodes, g.n_nodes, rng) * 2.0;

    ReconResult r = recon_loss(logits, target, w);
    CHECK(r.loss ==
          doctest::Approx(pairwise_recon_oracle(logits, densify(target), w)).epsilon(1e-12));

    Matrix fd = oracle::finite_diff_gradient(
        [&](const Matrix& l) { return recon_loss(l, target, w).loss; }, logits);
    CHECK(oracle::max_rel_err(r.dlogits, fd) < 1e-4);
  }
}

TEST_CASE("recon_loss rejects non-finite logits") {
  SpMatrix target = half_ones_target(3);
  Matrix bad = Matrix::Constant(3, 3, std::nan(""));
  CHECK_THROWS_AS(recon_loss(bad, target, ReconWeighting::unweighted()), NumericError);
}

TEST_CASE("recon_loss_grad_z agrees with the explicit-logits route") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Graph g = oracle::tiny_test_graph(seed, 7);
    SpMatrix target = recon_target(g.adjacency, true);
    ReconWeighting w = ReconWeighting::balanced(target);
    Rng rng(seed);
    Matrix z = normal_matrix(g.n_nodes, 3, rng);

    // Small blocks force the blocked path to stitch multiple pieces.
    ReconZResult fused = recon_loss_grad_z(z, target, w, 2);
    ReconResult explicit_route = recon_loss(decode_logits(z), target, w);
    CHECK(fused.loss == doctest::Approx(explicit_route.loss).epsilon(1e-12));

    // dZ = (G + G^T) Z from the explicit gradient.
    Matrix expect_dz = (explicit_route.dlogits + explicit_route.dlogits.transpose()) * z;
    CHECK(oracle::max_rel_err(fused.dz, expect_dz) < 1e-10);

    Matrix fd = oracle::finite_diff_gradient(
        [&](const Matrix& zz) { return recon_loss_grad_z(zz, target, w).loss; }, z);
    CHECK(oracle::max_rel_err(fused.dz, fd) < 1e-4);
  }
}

TEST_CASE("recon target diagonal handling") {
  Graph g = oracle::tiny_test_graph(9);
  SpMatrix with = recon_target(g.adjacency, true);
  SpMatrix without = recon_target(g.adjacency, false);
  CHECK(with.nonZeros() == without.nonZeros() + g.n_nodes);
  for (Index i = 0; i < g.n_nodes; ++i) CHECK(with.coeff(i, i) == 1.0);
}

TEST_CASE("kl_standard_normal: closed-form anchors") {
  Matrix zero = Matrix::Zero(3, 2);
  CHECK(kl_standard_normal(zero, zero).loss == 0.0);

  Matrix mu = Matrix::Constant(1, 1, 1.0);
  Matrix lv = Matrix::Zero(1, 1);
  CHECK(kl_standard_normal(mu, lv).loss == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kl_standard_normal is nonnegative and zero only at the prior") {
  Rng rng(60);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix mu = normal_matrix(4, 3, rng);
    Matrix lv = normal_matrix(4, 3, rng);
    CHECK(kl_standard_normal(mu, lv).loss >= 0.0);
  }
}

TEST_CASE("kl_standard_normal gradients match finite differences") {
  Rng rng(61);
  Matrix mu = normal_matrix(4, 3, rng);
  Matrix lv = normal_matrix(4, 3, rng);
  KlResult r = kl_standard_normal(mu, lv);
  Matrix fd_mu = oracle::finite_diff_gradient(
      [&](const Matrix& m) { return kl_standard_normal(m, lv).loss; }, mu);
  Matrix fd_lv = oracle::finite_diff_gradient(
      [&](const Matrix& l) { return kl_standard_normal(mu, l).loss; }, lv);
  CHECK(oracle::max_rel_err(r.dmu, fd_mu) < 1e-4);
  CHECK(oracle::max_rel_err(r.dlogvar, fd_lv) < 1e-4);
}

TEST_CASE("adversarial_losses: anchors and gradients") {
  {
    Vector half = Vector::Constant(4, 0.5);
    AdvLosses adv = adversarial_losses(half, half);
    CHECK(adv.disc_loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  }
  {
    Vector real = Vector::Constant(4, 1.0);
    Vector fake = Vector::Constant(4, 0.0);
    AdvLosses adv = adversarial_losses(real, fake);  // perfect, pre-clamp
    CHECK(adv.disc_loss < 1e-10);
  }
  {
    Rng rng(70);
    Vector real(5), fake(5);
    for (Index i = 0; i < 5; ++i) {
      real(i) = rng.uniform(0.05, 0.95);
      fake(i) = rng.uniform(0.05, 0.95);
    }
    AdvLosses adv = adversarial_losses(real, fake);
    auto as_matrix = [](const Vector& v) {
      Matrix m(v.size(), 1);
      m.col(0) = v;
      return m;
    };
    Matrix fd_real = oracle::finite_diff_gradient(
        [&](const Matrix& m) {
          return adversarial_losses(m.col(0), fake).disc_loss;
        },
        as_matrix(real));
    Matrix fd_fake = oracle::finite_diff_gradient(
        [&](const Matrix& m) {
          return adversarial_losses(real, m.col(0)).disc_loss;
        },
        as_matrix(fake));
    Matrix fd_gen = oracle::finite_diff_gradient(
        [&](const Matrix& m) {
          return adversarial_losses(real, m.col(0)).gen_loss;
        },
        as_matrix(fake));
    CHECK(oracle::max_rel_err(as_matrix(adv.ddisc_real), fd_real) < 1e-4);
    CHECK(oracle::max_rel_err(as_matrix(adv.ddisc_fake), fd_fake) < 1e-4);
    CHECK(oracle::max_rel_err(as_matrix(adv.dgen_fake), fd_gen) < 1e-4);
  }
}

TEST_CASE("wasserstein_dual_objective: identical batches and constant critics") {
  CriticParams p = small_critic(80, 3);
  Rng rng(81);
  Matrix batch = normal_matrix(6, 3, rng);
  CHECK(wasserstein_dual_objective(batch, batch, p) == 0.0);

  CriticParams constant = p;
  constant.w5.setZero();
  constant.b3(0, 0) = 0.37;
  Matrix other = normal_matrix(6, 3, rng);
  CHECK(wasserstein_dual_objective(batch, other, constant) == 0.0);

  Matrix wrong = normal_matrix(4, 3, rng);
  CHECK_THROWS_AS(wasserstein_dual_objective(batch, wrong, p), ShapeError);
}

TEST_CASE("wasserstein_dual_objective is antisymmetric under batch swap") {
  CriticParams p = small_critic(82, 2);
  Rng rng(83);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix a = normal_matrix(5, 2, rng);
    Matrix b = normal_matrix(5, 2, rng);
    const double forward = wasserstein_dual_objective(a, b, p);
    const double backward = wasserstein_dual_objective(b, a, p);
    CHECK(forward == doctest::Approx(-backward).epsilon(1e-15));
  }
}

TEST_CASE("warga_total_loss composition") {
  LossBreakdown plain = warga_total_loss(1.25, 0.0, 1.0);
  CHECK(plain.total == 1.25);
  CHECK(plain.regularizer == 0.0);

  LossBreakdown ablated = warga_total_loss(1.25, 123.0, 0.0);
  CHECK(ablated.regularizer == 0.0);
  CHECK(ablated.total == 1.25);

  LossBreakdown full = warga_total_loss(1.0, 0.25, 2.0);
  CHECK(full.regularizer == doctest::Approx(-0.5));
  CHECK(full.total == doctest::Approx(0.5));
  CHECK(full.total == full.reconstruction + full.regularizer);
}

TEST_CASE("w1_empirical_1d: anchors and the exhaustive assignment oracle") {
  Vector a(2), b(2);
  a << 0.0, 0.0;
  b << 1.0, 1.0;
  CHECK(w1_empirical_1d(a, a) == 0.0);
  CHECK(w1_empirical_1d(a, b) == 1.0);
  Vector c(3);
  CHECK_THROWS_AS(w1_empirical_1d(a, c), ShapeError);

  Rng rng(90);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = 2 + static_cast<Index>(rng.uniform_index(5));  // up to 6
    std::vector<double> xs(m), ys(m);
    Vector xv(m), yv(m);
    for (Index i = 0; i < m; ++i) {
      xs[i] = xv(i) = rng.normal();
      ys[i] = yv(i) = rng.normal();
    }
    CHECK(w1_empirical_1d(xv, yv) ==
          doctest::Approx(oracle::brute_force_w1_1d(xs, ys)).epsilon(1e-12));
  }
}

TEST_CASE("w1_empirical_1d satisfies the metric axioms on samples") {
  Rng rng(91);
  for (int trial = 0; trial < 30; ++trial) {
    const Index m = 3 + static_cast<Index>(rng.uniform_index(6));
    Matrix triple = normal_matrix(3, m, rng);
    Vector a = triple.row(0).transpose();
    Vector b = triple.row(1).transpose();
    Vector c = triple.row(2).transpose();
    CHECK(w1_empirical_1d(a, b) >= 0.0);
    CHECK(w1_empirical_1d(a, b) == doctest::Approx(w1_empirical_1d(b, a)).epsilon(1e-15));
    CHECK(w1_empirical_1d(a, c) <=
          w1_empirical_1d(a, b) + w1_empirical_1d(b, c) + 1e-12);
  }
}

TEST_CASE("clipped-critic dual never exceeds the Lipschitz multiple of the primal") {
  Rng rng(92);
  for (int trial = 0; trial < 25; ++trial) {
    CriticParams p = small_critic(1000 + trial, 1);
    p.clip_bound = 0.01;
    clip_params(p);
    const double bound = critic_lipschitz_bound(p);
    const Index m = 8;
    Matrix r = normal_matrix(m, 1, rng);
    Matrix z = (normal_matrix(m, 1, rng).array() + rng.uniform(-2.0, 2.0)).matrix();
    const double dual = wasserstein_dual_objective(r, z, p);
    const double primal = w1_empirical_1d(r.col(0), z.col(0));
    CHECK(std::abs(dual) <= bound * primal + 1e-12);
  }
}
