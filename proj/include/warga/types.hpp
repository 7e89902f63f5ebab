#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace warga {

// Dense storage is row-major so matrices serialize to checkpoint/embedding
// files in the same order they are laid out in memory. Sparse storage is CSR.
template <class Scalar>
using DenseMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Scalar>
using SparseMat = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMat<double>;
using SpMatrix = SparseMat<double>;
using Vector = Vec<double>;
using Index = Eigen::Index;

// Undirected edges are canonicalized as (min, max) index pairs.
using EdgePair = std::pair<int, int>;
using EdgeList = std::vector<EdgePair>;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_shape(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

}  // namespace warga
