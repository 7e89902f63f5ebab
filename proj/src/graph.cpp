#include "warga/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "warga/linalg.hpp"

namespace warga {

namespace {

// Canonical key for an undirected pair, usable in hash sets.
inline std::uint64_t pair_key(int i, int j) {
  if (i > j) std::swap(i, j);
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j);
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

}  // namespace

EdgeList undirected_edges(const SpMatrix& adjacency) {
  EdgeList edges;
  for (int i = 0; i < adjacency.outerSize(); ++i) {
    for (SpMatrix::InnerIterator it(adjacency, i); it; ++it) {
      if (it.col() > it.row())
        edges.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()));
    }
  }
  return edges;
}

SpMatrix adjacency_from_edges(int n_nodes, const EdgeList& edges) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(edges.size() * 2);
  for (const auto& [i, j] : edges) {
    trips.emplace_back(i, j, 1.0);
    trips.emplace_back(j, i, 1.0);
  }
  SpMatrix adj(n_nodes, n_nodes);
  adj.setFromTriplets(trips.begin(), trips.end(),
                      [](const double&, const double&) { return 1.0; });
  adj.makeCompressed();
  return adj;
}

Graph load_graph(const std::string& edges_path, const std::string& features_path,
                 const std::string& labels_path) {
  Graph g;

  // Features first: the header fixes N, which edge indices are checked against.
  {
    std::ifstream in = open_or_throw(features_path);
    std::string line;
    int line_no = 0;
    bool dense = false;
    long n = -1, c = -1;
    while (std::getline(in, line)) {
      ++line_no;
      if (is_comment_or_blank(line)) continue;
      std::istringstream hs(line);
      std::string first;
      hs >> first;
      if (first == "DENSE") {
        dense = true;
        if (!(hs >> n >> c))
          throw ParseError(features_path + ":" + std::to_string(line_no) +
                           ": bad DENSE header");
      } else {
        n = std::strtol(first.c_str(), nullptr, 10);
        if (!(hs >> c) || n <= 0)
          throw ParseError(features_path + ":" + std::to_string(line_no) +
                           ": bad header, expected 'N C' or 'DENSE N C'");
      }
      break;
    }
    if (n <= 0 || c <= 0)
      throw ParseError(features_path + ": missing or empty header");
    g.n_nodes = static_cast<int>(n);
    g.features = Matrix::Zero(n, c);

    if (dense) {
      long row = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        if (row >= n)
          throw ParseError(features_path + ":" + std::to_string(line_no) +
                           ": more rows than header declares");
        std::istringstream ls(line);
        for (long j = 0; j < c; ++j) {
          double v;
          if (!(ls >> v))
            throw ParseError(features_path + ":" + std::to_string(line_no) +
                             ": expected " + std::to_string(c) + " values");
          g.features(row, j) = v;
        }
        ++row;
      }
      if (row != n)
        throw ParseError(features_path + ": got " + std::to_string(row) +
                         " dense rows, header declares " + std::to_string(n));
    } else {
      while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        std::istringstream ls(line);
        long node, feat;
        double value;
        if (!(ls >> node >> feat >> value))
          throw ParseError(features_path + ":" + std::to_string(line_no) +
                           ": expected 'node feature value'");
        if (node < 0 || node >= n || feat < 0 || feat >= c)
          throw ValidationError(features_path + ":" + std::to_string(line_no) +
                                ": index out of range");
        g.features(node, feat) = value;
      }
    }
  }

  // Edge list: undirected, duplicates and self-loops dropped.
  {
    std::ifstream in = open_or_throw(edges_path);
    std::string line;
    int line_no = 0;
    std::set<EdgePair> unique_edges;
    while (std::getline(in, line)) {
      ++line_no;
      if (is_comment_or_blank(line)) continue;
      std::istringstream ls(line);
      long u, v;
      if (!(ls >> u >> v))
        throw ParseError(edges_path + ":" + std::to_string(line_no) +
                         ": expected two node indices");
      std::string rest;
      if (ls >> rest)
        throw ParseError(edges_path + ":" + std::to_string(line_no) +
                         ": trailing tokens after edge");
      if (u < 0 || u >= g.n_nodes || v < 0 || v >= g.n_nodes)
        throw ValidationError(edges_path + ":" + std::to_string(line_no) +
                              ": node index out of range [0, " +
                              std::to_string(g.n_nodes) + ")");
      if (u == v) continue;
      unique_edges.emplace(static_cast<int>(std::min(u, v)),
                           static_cast<int>(std::max(u, v)));
    }
    EdgeList edges(unique_edges.begin(), unique_edges.end());
    g.adjacency = adjacency_from_edges(g.n_nodes, edges);
  }

  if (!labels_path.empty()) {
    std::ifstream in = open_or_throw(labels_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (is_comment_or_blank(line)) continue;
      std::istringstream ls(line);
      long id;
      if (!(ls >> id) || id < 0)
        throw ParseError(labels_path + ":" + std::to_string(line_no) +
                         ": expected a nonnegative class id");
      g.labels.push_back(static_cast<int>(id));
    }
    if (static_cast<int>(g.labels.size()) != g.n_nodes)
      throw ValidationError(labels_path + ": " + std::to_string(g.labels.size()) +
                            " labels for " + std::to_string(g.n_nodes) + " nodes");
    g.n_classes = *std::max_element(g.labels.begin(), g.labels.end()) + 1;
  }

  return g;
}

NormalizedAdjacency normalize_adjacency(const SpMatrix& adjacency) {
  require_shape(adjacency.rows() == adjacency.cols(), "normalize: square matrix");
  const Index n = adjacency.rows();
  SpMatrix tilde = adjacency;
  tilde += sparse_identity(n);
  tilde.makeCompressed();

  Vector inv_sqrt_deg(n);
  for (Index i = 0; i < n; ++i) {
    double deg = 0.0;
    for (SpMatrix::InnerIterator it(tilde, i); it; ++it) deg += it.value();
    inv_sqrt_deg(i) = 1.0 / std::sqrt(deg);  // deg >= 1 from the self-loop
  }
  for (Index i = 0; i < n; ++i) {
    for (SpMatrix::InnerIterator it(tilde, i); it; ++it)
      it.valueRef() *= inv_sqrt_deg(it.row()) * inv_sqrt_deg(it.col());
  }
  return NormalizedAdjacency{std::move(tilde)};
}

NormalizedAdjacency normalize(const Graph& g) { return normalize_adjacency(g.adjacency); }

EdgeSplit split_edges(const Graph& g, double val_frac, double test_frac, Rng& rng) {
  require_shape(val_frac > 0.0 && test_frac > 0.0 && val_frac + test_frac < 1.0,
                "split_edges: fractions must be positive and sum below 1");

  EdgeList edges = undirected_edges(g.adjacency);
  const std::int64_t n_edges = static_cast<std::int64_t>(edges.size());
  const std::int64_t n_val = std::llround(val_frac * static_cast<double>(n_edges));
  const std::int64_t n_test = std::llround(test_frac * static_cast<double>(n_edges));
  if (n_val < 1 || n_test < 1 || n_val + n_test >= n_edges)
    throw SamplingError("split_edges: graph has too few edges for the requested split");

  // Fisher-Yates with the seeded stream.
  for (std::int64_t i = n_edges - 1; i > 0; --i) {
    std::int64_t j = static_cast<std::int64_t>(
        rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
    std::swap(edges[i], edges[j]);
  }

  EdgeSplit split;
  split.val_pos.assign(edges.begin(), edges.begin() + n_val);
  split.test_pos.assign(edges.begin() + n_val, edges.begin() + n_val + n_test);
  EdgeList train_edges(edges.begin() + n_val + n_test, edges.end());
  split.train_adjacency = adjacency_from_edges(g.n_nodes, train_edges);

  // Negatives: uniform over non-edges of the FULL graph, without replacement.
  const std::int64_t n = g.n_nodes;
  const std::int64_t n_pairs = n * (n - 1) / 2;
  const std::int64_t n_non_edges = n_pairs - n_edges;
  const std::int64_t needed = n_val + n_test;
  if (needed > n_non_edges)
    throw SamplingError("split_edges: not enough non-edges to sample negatives");

  std::unordered_set<std::uint64_t> full_edge_keys;
  full_edge_keys.reserve(edges.size() * 2);
  for (const auto& [i, j] : edges) full_edge_keys.insert(pair_key(i, j));

  EdgeList negatives;
  negatives.reserve(needed);
  if (2 * needed > n_non_edges || 4 * n_non_edges < n_pairs) {
    // Dense regime: enumerate non-edges and shuffle.
    EdgeList pool;
    pool.reserve(n_non_edges);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (!full_edge_keys.count(pair_key(i, j))) pool.emplace_back(i, j);
    for (std::int64_t i = static_cast<std::int64_t>(pool.size()) - 1; i > 0; --i) {
      std::int64_t j = static_cast<std::int64_t>(
          rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
      std::swap(pool[i], pool[j]);
    }
    negatives.assign(pool.begin(), pool.begin() + needed);
  } else {
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(needed * 2);
    while (static_cast<std::int64_t>(negatives.size()) < needed) {
      int i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      int j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      const std::uint64_t key = pair_key(i, j);
      if (full_edge_keys.count(key) || chosen.count(key)) continue;
      chosen.insert(key);
      negatives.emplace_back(i, j);
    }
  }
  split.val_neg.assign(negatives.begin(), negatives.begin() + n_val);
  split.test_neg.assign(negatives.begin() + n_val, negatives.end());
  return split;
}

Graph generate_sbm(const SbmSpec& spec) {
  require_shape(!spec.block_sizes.empty(), "generate_sbm: no blocks");
  require_shape(0.0 <= spec.p_out && spec.p_out <= spec.p_in && spec.p_in <= 1.0,
                "generate_sbm: need 0 <= p_out <= p_in <= 1");

  Graph g;
  for (std::size_t block = 0; block < spec.block_sizes.size(); ++block) {
    require_shape(spec.block_sizes[block] >= 1, "generate_sbm: empty block");
    for (int i = 0; i < spec.block_sizes[block]; ++i)
      g.labels.push_back(static_cast<int>(block));
  }
  g.n_nodes = static_cast<int>(g.labels.size());
  g.n_classes = static_cast<int>(spec.block_sizes.size());

  Rng rng(spec.seed);
  EdgeList edges;
  for (int i = 0; i < g.n_nodes; ++i) {
    for (int j = i + 1; j < g.n_nodes; ++j) {
      const double p = g.labels[i] == g.labels[j] ? spec.p_in : spec.p_out;
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  g.adjacency = adjacency_from_edges(g.n_nodes, edges);

  if (spec.feature_mode == SbmSpec::Features::Identity) {
    g.features = Matrix::Identity(g.n_nodes, g.n_nodes);
  } else {
    g.features = Matrix::Zero(g.n_nodes, g.n_classes);
    for (int i = 0; i < g.n_nodes; ++i) g.features(i, g.labels[i]) = 1.0;
  }
  return g;
}

Matrix row_normalize(const Matrix& features) {
  Matrix out = features;
  for (Index i = 0; i < out.rows(); ++i) {
    const double sum = out.row(i).sum();
    if (sum != 0.0) out.row(i) /= sum;
  }
  return out;
}

}  // namespace warga
