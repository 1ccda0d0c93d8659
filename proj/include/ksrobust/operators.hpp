#pragma once

// Symmetric linear operators consumed by the SDP solver, the spectral
// routines and the program search. Every operator exposes
//   size(), apply(in, out) for an n x k block, diagonal(i), entry(i, j)
// and, where meaningful, restrict(S) returning the principal submatrix
// on S as an operator of the same kind.

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include "ksrobust/error.hpp"
#include "ksrobust/graph.hpp"

namespace ksrobust {

using Index = Eigen::Index;
/// Row-major so each row of a Gram factor is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

template <class Op>
concept SymmetricOperator = requires(const Op& op, const Matrix& in, Matrix& out, Index i) {
  { op.size() } -> std::convertible_to<Index>;
  op.apply(in, out);
  { op.diagonal(i) } -> std::convertible_to<double>;
  { op.entry(i, i) } -> std::convertible_to<double>;
};

template <class Op>
concept RestrictableOperator = SymmetricOperator<Op> && requires(const Op& op, std::span<const Vertex> s) {
  { op.restrict(s) } -> std::same_as<Op>;
};

/// Materializes any operator densely; meant for tests and small n.
template <SymmetricOperator Op>
DenseMatrix to_dense(const Op& op) {
  const Index n = op.size();
  DenseMatrix out(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out(i, j) = op.entry(i, j);
  return out;
}

/// A - shift * J for a 0/1 adjacency A. Matvec costs O(|E| k + n k).
class CenteredMatrix {
 public:
  CenteredMatrix(Graph graph, double shift) : graph_(std::move(graph)), shift_(shift) {}

  Index size() const { return static_cast<Index>(graph_.n()); }
  const Graph& graph() const { return graph_; }
  double shift() const { return shift_; }

  void apply(const Matrix& in, Matrix& out) const {
    const Index n = size();
    const Index k = in.cols();
    out.resize(n, k);
    const Eigen::RowVectorXd column_sums = in.colwise().sum();
    for (Index i = 0; i < n; ++i) {
      auto row = out.row(i);
      row = -shift_ * column_sums;
      for (Vertex j : graph_.neighbors(static_cast<Vertex>(i))) row += in.row(j);
    }
  }

  double diagonal(Index) const { return -shift_; }

  double entry(Index i, Index j) const {
    const double a = (i != j && graph_.has_edge(static_cast<Vertex>(i), static_cast<Vertex>(j))) ? 1.0 : 0.0;
    return a - shift_;
  }

  CenteredMatrix restrict(std::span<const Vertex> keep) const {
    return CenteredMatrix(graph_.induced(keep), shift_);
  }

  /// Euclidean norm of each row of the principal submatrix on `members`.
  std::vector<double> restricted_row_norms(std::span<const Vertex> members) const {
    std::vector<char> in_set(graph_.n(), 0);
    for (Vertex v : members) in_set[v] = 1;
    const double m = static_cast<double>(members.size());
    std::vector<double> norms(graph_.n(), 0.0);
    for (Vertex v = 0; v < graph_.n(); ++v) {
      double inside = 0;
      for (Vertex u : graph_.neighbors(v)) inside += in_set[u];
      const double other = m - inside;
      norms[v] = std::sqrt(inside * (1 - shift_) * (1 - shift_) + other * shift_ * shift_);
    }
    return norms;
  }

 private:
  Graph graph_;
  double shift_;
};

/// Centered adjacency A - (d/n) J.
inline CenteredMatrix center_adjacency(const Graph& graph, double d) {
  require(d > 0, "center_adjacency: d must be positive");
  require(graph.n() > 0, "center_adjacency: empty vertex set");
  return CenteredMatrix(graph, d / static_cast<double>(graph.n()));
}

/// Explicit dense symmetric matrix.
class DenseSymmetric {
 public:
  explicit DenseSymmetric(DenseMatrix m) : m_(std::move(m)) {
    require(m_.rows() == m_.cols(), "matrix must be square");
    const double scale = m_.cwiseAbs().maxCoeff();
    for (Index i = 0; i < m_.rows(); ++i)
      for (Index j = i + 1; j < m_.cols(); ++j)
        require(std::abs(m_(i, j) - m_(j, i)) <= 1e-12 * scale,
                "matrix is not symmetric");
  }

  Index size() const { return m_.rows(); }
  const DenseMatrix& matrix() const { return m_; }

  void apply(const Matrix& in, Matrix& out) const { out.noalias() = m_ * in; }

  double diagonal(Index i) const { return m_(i, i); }
  double entry(Index i, Index j) const { return m_(i, j); }

  DenseSymmetric restrict(std::span<const Vertex> keep) const {
    const Index k = static_cast<Index>(keep.size());
    DenseMatrix sub(k, k);
    for (Index a = 0; a < k; ++a)
      for (Index b = 0; b < k; ++b) sub(a, b) = m_(keep[a], keep[b]);
    return DenseSymmetric(std::move(sub), Trusted{});
  }

  std::vector<double> restricted_row_norms(std::span<const Vertex> members) const {
    std::vector<double> norms(m_.rows(), 0.0);
    for (Index i = 0; i < m_.rows(); ++i) {
      double s = 0;
      for (Vertex j : members) s += m_(i, j) * m_(i, j);
      norms[i] = std::sqrt(s);
    }
    return norms;
  }

 private:
  struct Trusted {};
  DenseSymmetric(DenseMatrix m, Trusted) : m_(std::move(m)) {}

  DenseMatrix m_;
};

/// base + coefficient * u u^T.
template <SymmetricOperator Base>
class RankOneUpdate {
 public:
  RankOneUpdate(Base base, double coefficient, Vector u)
      : base_(std::move(base)), coefficient_(coefficient), u_(std::move(u)) {
    require(u_.size() == base_.size(), "rank-one update dimension mismatch");
  }

  Index size() const { return base_.size(); }

  void apply(const Matrix& in, Matrix& out) const {
    base_.apply(in, out);
    const Eigen::RowVectorXd projection = u_.transpose() * in;
    out.noalias() += coefficient_ * u_ * projection;
  }

  double diagonal(Index i) const { return base_.diagonal(i) + coefficient_ * u_(i) * u_(i); }
  double entry(Index i, Index j) const { return base_.entry(i, j) + coefficient_ * u_(i) * u_(j); }

  RankOneUpdate restrict(std::span<const Vertex> keep) const
    requires RestrictableOperator<Base>
  {
    Vector sub(static_cast<Index>(keep.size()));
    for (std::size_t a = 0; a < keep.size(); ++a) sub(static_cast<Index>(a)) = u_(keep[a]);
    return RankOneUpdate(base_.restrict(keep), coefficient_, std::move(sub));
  }

 private:
  Base base_;
  double coefficient_;
  Vector u_;
};

/// base - Diag(lambda); used by the dual certificate.
template <SymmetricOperator Base>
class DiagonalShift {
 public:
  DiagonalShift(const Base& base, Vector lambda) : base_(base), lambda_(std::move(lambda)) {}

  Index size() const { return base_.size(); }

  void apply(const Matrix& in, Matrix& out) const {
    base_.apply(in, out);
    out -= lambda_.asDiagonal() * in;
  }

  double diagonal(Index i) const { return base_.diagonal(i) - lambda_(i); }
  double entry(Index i, Index j) const { return base_.entry(i, j) - (i == j ? lambda_(i) : 0.0); }

 private:
  const Base& base_;
  Vector lambda_;
};

/// Symmetrized block embedding 1/2 [[0, M], [M^T, 0]] of a square M. Its
/// basic SDP value equals max sum_ij M_ij <u_i, v_j> over unit vectors.
class BipartiteEmbedding {
 public:
  explicit BipartiteEmbedding(DenseMatrix m) : m_(std::move(m)) {
    require(m_.rows() == m_.cols(), "Grothendieck norm needs a square matrix");
  }

  Index size() const { return 2 * m_.rows(); }

  void apply(const Matrix& in, Matrix& out) const {
    const Index n = m_.rows();
    out.resize(2 * n, in.cols());
    out.topRows(n).noalias() = 0.5 * (m_ * in.bottomRows(n));
    out.bottomRows(n).noalias() = 0.5 * (m_.transpose() * in.topRows(n));
  }

  double diagonal(Index) const { return 0.0; }

  double entry(Index i, Index j) const {
    const Index n = m_.rows();
    if (i < n && j >= n) return 0.5 * m_(i, j - n);
    if (i >= n && j < n) return 0.5 * m_(j, i - n);
    return 0.0;
  }

 private:
  DenseMatrix m_;
};

}  // namespace ksrobust
