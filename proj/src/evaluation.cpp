#include "warga/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "warga/linalg.hpp"

namespace warga {

namespace {

// Contingency counts between two labelings over the same items.
struct Contingency {
  std::vector<std::vector<long long>> cells;  // n_u x n_v
  std::vector<long long> row_sums, col_sums;
  long long n = 0;
};

Contingency contingency(const std::vector<int>& u, const std::vector<int>& v) {
  require_shape(u.size() == v.size() && !u.empty(),
                "contingency: label vectors must be non-empty and equal length");
  const int n_u = *std::max_element(u.begin(), u.end()) + 1;
  const int n_v = *std::max_element(v.begin(), v.end()) + 1;
  Contingency c;
  c.cells.assign(n_u, std::vector<long long>(n_v, 0));
  c.row_sums.assign(n_u, 0);
  c.col_sums.assign(n_v, 0);
  c.n = static_cast<long long>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    require_shape(u[i] >= 0 && v[i] >= 0, "contingency: negative label");
    c.cells[u[i]][v[i]] += 1;
    c.row_sums[u[i]] += 1;
    c.col_sums[v[i]] += 1;
  }
  return c;
}

inline long long comb2(long long x) { return x * (x - 1) / 2; }

// Min-cost assignment on a square matrix (Hungarian with potentials), O(n^3).
std::vector<int> hungarian_min_assign(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double squared_distance(const Matrix& z, Index row, const Matrix& centroids, int c) {
  return (z.row(row) - centroids.row(c)).squaredNorm();
}

struct LloydResult {
  std::vector<int> labels;
  Matrix centroids;
  double inertia = 0.0;
  std::vector<double> history;
};

LloydResult lloyd_once(const Matrix& z, int k, Rng& rng) {
  const Index n = z.rows();

  // k-means++ seeding.
  Matrix centroids(k, z.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  Index first = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
  centroids.row(0) = z.row(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(z, i, centroids, c - 1));
      total += d2[i];
    }
    Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    }
    centroids.row(c) = z.row(pick);
  }

  LloydResult r;
  r.labels.assign(n, 0);
  constexpr int kMaxIters = 300;
  for (int iter = 0; iter < kMaxIters; ++iter) {
    bool changed = iter == 0;
    double inertia = 0.0;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(z, i, centroids, 0);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(z, i, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (r.labels[i] != best) changed = true;
      r.labels[i] = best;
      inertia += best_d;
    }
    r.inertia = inertia;
    r.history.push_back(inertia);
    if (!changed && iter > 0) break;

    // Recompute means; re-seed empty clusters from the farthest point.
    Matrix sums = Matrix::Zero(k, z.cols());
    std::vector<long long> counts(k, 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(r.labels[i]) += z.row(i);
      counts[r.labels[i]] += 1;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
      } else {
        Index far = 0;
        double far_d = -1.0;
        for (Index i = 0; i < n; ++i) {
          const double d = squared_distance(z, i, centroids, r.labels[i]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centroids.row(c) = z.row(far);
      }
    }
  }
  r.centroids = std::move(centroids);
  return r;
}

}  // namespace

ScoredEdges score_edges(const Matrix& z, const EdgeList& pos, const EdgeList& neg) {
  ScoredEdges s;
  s.pairs.reserve(pos.size() + neg.size());
  s.scores.resize(static_cast<Index>(pos.size() + neg.size()));
  Index idx = 0;
  for (const auto& [i, j] : pos) {
    require_shape(i >= 0 && i < z.rows() && j >= 0 && j < z.rows(),
                  "score_edges: pair index out of range");
    s.pairs.emplace_back(i, j);
    s.scores(idx++) = sigmoid(z.row(i).dot(z.row(j)));
    s.labels.push_back(1);
  }
  for (const auto& [i, j] : neg) {
    require_shape(i >= 0 && i < z.rows() && j >= 0 && j < z.rows(),
                  "score_edges: pair index out of range");
    s.pairs.emplace_back(i, j);
    s.scores(idx++) = sigmoid(z.row(i).dot(z.row(j)));
    s.labels.push_back(0);
  }
  return s;
}

double auc(const ScoredEdges& scored) {
  const Index n = scored.scores.size();
  long long n_pos = 0, n_neg = 0;
  for (int l : scored.labels) (l == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0)
    throw MetricError("auc: needs at least one positive and one negative");

  // Average ranks over ties, then the Mann-Whitney statistic.
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return scored.scores(a) < scored.scores(b);
  });
  double rank_sum_pos = 0.0;
  Index i = 0;
  while (i < n) {
    Index j = i;
    while (j + 1 < n && scored.scores(order[j + 1]) == scored.scores(order[i])) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Index t = i; t <= j; ++t)
      if (scored.labels[order[t]] == 1) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double u_stat =
      rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u_stat / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double average_precision(const ScoredEdges& scored) {
  const Index n = scored.scores.size();
  long long n_pos = std::count(scored.labels.begin(), scored.labels.end(), 1);
  if (n_pos == 0) throw MetricError("average_precision: no positives");

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return scored.scores(a) > scored.scores(b);
  });
  double ap = 0.0;
  long long tp = 0;
  for (Index k = 0; k < n; ++k) {
    if (scored.labels[order[k]] == 1) {
      tp += 1;
      const double precision_at_k = static_cast<double>(tp) / static_cast<double>(k + 1);
      ap += precision_at_k / static_cast<double>(n_pos);
    }
  }
  return ap;
}

ClusterAssignment kmeans(const Matrix& z, int k, Rng& rng, int restarts) {
  require_shape(k >= 1 && k <= z.rows(), "kmeans: need 1 <= k <= n");
  require_shape(restarts >= 1, "kmeans: need at least one restart");

  ClusterAssignment best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    LloydResult run = lloyd_once(z, k, rng);
    if (run.inertia < best.inertia) {
      best.labels = std::move(run.labels);
      best.centroids = std::move(run.centroids);
      best.inertia = run.inertia;
      best.inertia_history = std::move(run.history);
    }
  }
  return best;
}

double clustering_accuracy(const std::vector<int>& assignment,
                           const std::vector<int>& labels) {
  Contingency c = contingency(assignment, labels);
  const int side = static_cast<int>(std::max(c.row_sums.size(), c.col_sums.size()));
  double max_cell = 0.0;
  for (const auto& row : c.cells)
    for (long long v : row) max_cell = std::max(max_cell, static_cast<double>(v));
  std::vector<std::vector<double>> cost(side, std::vector<double>(side, max_cell));
  for (std::size_t i = 0; i < c.cells.size(); ++i)
    for (std::size_t j = 0; j < c.cells[i].size(); ++j)
      cost[i][j] = max_cell - static_cast<double>(c.cells[i][j]);
  const std::vector<int> match = hungarian_min_assign(cost);
  long long correct = 0;
  for (std::size_t i = 0; i < c.cells.size(); ++i) {
    const int j = match[i];
    if (j >= 0 && j < static_cast<int>(c.cells[i].size())) correct += c.cells[i][j];
  }
  return static_cast<double>(correct) / static_cast<double>(c.n);
}

double nmi(const std::vector<int>& assignment, const std::vector<int>& labels) {
  Contingency c = contingency(assignment, labels);
  const double n = static_cast<double>(c.n);
  double mutual = 0.0;
  for (std::size_t i = 0; i < c.cells.size(); ++i) {
    for (std::size_t j = 0; j < c.cells[i].size(); ++j) {
      const long long nij = c.cells[i][j];
      if (nij == 0) continue;
      mutual += (static_cast<double>(nij) / n) *
                std::log(n * static_cast<double>(nij) /
                         (static_cast<double>(c.row_sums[i]) *
                          static_cast<double>(c.col_sums[j])));
    }
  }
  auto entropy = [n](const std::vector<long long>& sums) {
    double h = 0.0;
    for (long long s : sums) {
      if (s == 0) continue;
      const double p = static_cast<double>(s) / n;
      h -= p * std::log(p);
    }
    return h;
  };
  const double hu = entropy(c.row_sums);
  const double hv = entropy(c.col_sums);
  if (hu == 0.0 || hv == 0.0) return 0.0;
  return mutual / std::sqrt(hu * hv);
}

double ari(const std::vector<int>& assignment, const std::vector<int>& labels) {
  Contingency c = contingency(assignment, labels);
  long long cells2 = 0, rows2 = 0, cols2 = 0;
  for (const auto& row : c.cells)
    for (long long v : row) cells2 += comb2(v);
  for (long long s : c.row_sums) rows2 += comb2(s);
  for (long long s : c.col_sums) cols2 += comb2(s);
  const long long total2 = comb2(c.n);

  // Pair-confusion counts.
  const long long tp = cells2;
  const long long fp = rows2 - cells2;
  const long long fn = cols2 - cells2;
  const long long tn = total2 - rows2 - cols2 + cells2;
  if (fp == 0 && fn == 0) return 1.0;  // identical partitions, trivial or not
  const double num = 2.0 * (static_cast<double>(tp) * static_cast<double>(tn) -
                            static_cast<double>(fp) * static_cast<double>(fn));
  const double den = static_cast<double>(tp + fn) * static_cast<double>(fn + tn) +
                     static_cast<double>(tp + fp) * static_cast<double>(fp + tn);
  return num / den;
}

MetricsReport aggregate(const std::vector<std::map<std::string, double>>& per_seed) {
  require_shape(!per_seed.empty(), "aggregate: no runs");
  MetricsReport r;
  r.per_seed = per_seed;
  for (const auto& [key, value] : per_seed.front()) {
    (void)value;
    double sum = 0.0;
    for (const auto& run : per_seed) sum += run.at(key);
    const double mean = sum / static_cast<double>(per_seed.size());
    double sq = 0.0;
    for (const auto& run : per_seed) {
      const double d = run.at(key) - mean;
      sq += d * d;
    }
    r.mean[key] = mean;
    r.stddev[key] = std::sqrt(sq / static_cast<double>(per_seed.size()));
  }
  return r;
}

}  // namespace warga
