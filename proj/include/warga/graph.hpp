#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "warga/rng.hpp"
#include "warga/types.hpp"

namespace warga {

// Undirected graph with node features and optional class labels.
// The adjacency is symmetric with a zero diagonal; self-loops enter only
// through normalization.
struct Graph {
  int n_nodes = 0;
  SpMatrix adjacency;        // N x N, binary, symmetric
  Matrix features;           // N x c
  std::vector<int> labels;   // empty when absent
  int n_classes = 0;

  Index feature_dim() const { return features.cols(); }
  bool has_labels() const { return !labels.empty(); }
};

// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
struct NormalizedAdjacency {
  SpMatrix matrix;
};

struct EdgeSplit {
  SpMatrix train_adjacency;  // symmetric, training edges only
  EdgeList val_pos, val_neg;
  EdgeList test_pos, test_neg;
};

struct SbmSpec {
  std::vector<int> block_sizes;
  double p_in = 0.2;
  double p_out = 0.01;
  enum class Features { Identity, BlockIndicator } feature_mode = Features::Identity;
  std::uint64_t seed = 0;
};

// Edge/feature/label text formats are described in docs/formats.md.
Graph load_graph(const std::string& edges_path, const std::string& features_path,
                 const std::string& labels_path = "");

NormalizedAdjacency normalize_adjacency(const SpMatrix& adjacency);
NormalizedAdjacency normalize(const Graph& g);

// Uniform random partition of the undirected edges; negatives are sampled
// from non-edges of the full graph so a held-out positive can never appear
// as a negative.
EdgeSplit split_edges(const Graph& g, double val_frac, double test_frac, Rng& rng);

Graph generate_sbm(const SbmSpec& spec);

// Upper-triangle (i < j) edge list of a symmetric adjacency.
EdgeList undirected_edges(const SpMatrix& adjacency);

// Symmetric binary adjacency from canonical (i < j) pairs.
SpMatrix adjacency_from_edges(int n_nodes, const EdgeList& edges);

// Scale each nonzero row to sum 1.
Matrix row_normalize(const Matrix& features);

}  // namespace warga
