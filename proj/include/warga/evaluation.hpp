#pragma once

#include <map>
#include <string>
#include <vector>

#include "warga/rng.hpp"
#include "warga/types.hpp"

namespace warga {

struct ScoredEdges {
  EdgeList pairs;
  Vector scores;
  std::vector<int> labels;  // 1 = positive, 0 = negative
};

// sigmoid(z_i . z_j) per pair; positives first, then negatives.
ScoredEdges score_edges(const Matrix& z, const EdgeList& pos, const EdgeList& neg);

// Mann-Whitney AUC: probability a random positive outscores a random
// negative, ties counted 1/2.
double auc(const ScoredEdges& scored);

// Average precision over the descending-score ranking; ties broken by pair
// index so results are reproducible.
double average_precision(const ScoredEdges& scored);

struct ClusterAssignment {
  std::vector<int> labels;
  Matrix centroids;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // per Lloyd iteration of the winning restart
};

// Lloyd's algorithm with k-means++ seeding, best of `restarts` by inertia.
// Empty clusters are re-seeded from the point farthest from its centroid.
ClusterAssignment kmeans(const Matrix& z, int k, Rng& rng, int restarts = 10);

// Best accuracy over injective cluster->class maps (Hungarian on the
// contingency matrix).
double clustering_accuracy(const std::vector<int>& assignment,
                           const std::vector<int>& labels);

// I(U;V) / sqrt(H(U) H(V)), natural logs; 0/0 -> 0.
double nmi(const std::vector<int>& assignment, const std::vector<int>& labels);

// Adjusted Rand index via pair counting.
double ari(const std::vector<int>& assignment, const std::vector<int>& labels);

struct MetricsReport {
  std::vector<std::map<std::string, double>> per_seed;
  std::map<std::string, double> mean;
  std::map<std::string, double> stddev;  // population standard deviation
};

MetricsReport aggregate(const std::vector<std::map<std::string, double>>& per_seed);

}  // namespace warga
