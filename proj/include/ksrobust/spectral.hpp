#pragma once

// Extreme eigenvalues of symmetric operators and the high-degree zeroing
// that leaves a spectrally bounded centered submatrix.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ksrobust/graph.hpp"
#include "ksrobust/operators.hpp"
#include "ksrobust/rng.hpp"

namespace ksrobust {

struct ExtremeEigenpairs {
  double largest = 0;
  double smallest = 0;
  Vector largest_vector;
  Vector smallest_vector;
  int iterations = 0;
  bool converged = false;
};

/// Lanczos with full reorthogonalization from a random start. Stops once
/// both extreme Ritz pairs have residual <= tol * spectral scale, or the
/// Krylov space is exhausted (exact answer).
template <SymmetricOperator Op>
ExtremeEigenpairs lanczos_extremes(const Op& op, Rng& rng, double tol = 1e-6, int max_steps = 300) {
  const Index n = op.size();
  ExtremeEigenpairs out;
  if (n == 0) {
    out.converged = true;
    return out;
  }
  const Index limit = std::min<Index>(n, std::max(max_steps, 2));
  DenseMatrix basis(n, limit);
  std::vector<double> alpha, beta;
  Matrix q(n, 1), w(n, 1);
  for (Index i = 0; i < n; ++i) q(i, 0) = rng.normal();
  q /= q.norm();

  Eigen::SelfAdjointEigenSolver<DenseMatrix> ritz;
  for (Index j = 0; j < limit; ++j) {
    basis.col(j) = q.col(0);
    op.apply(q, w);
    const double a = basis.col(j).dot(w.col(0));
    alpha.push_back(a);
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      const Vector coeffs = basis.leftCols(j + 1).transpose() * w.col(0);
      w.col(0) -= basis.leftCols(j + 1) * coeffs;
    }
    const double b = w.norm();
    const Index m = j + 1;
    const bool last = m == limit || m == n;
    if (m % 8 != 0 && !last && b > 1e-10 * std::abs(a)) {
      beta.push_back(b);
      q = w / b;
      continue;
    }

    Vector diag = Eigen::Map<const Vector>(alpha.data(), m);
    Vector sub = beta.empty() ? Vector() : Vector(Eigen::Map<const Vector>(beta.data(), m - 1));
    ritz.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Vector& theta = ritz.eigenvalues();
    const double scale = std::max({std::abs(theta(0)), std::abs(theta(m - 1)), 1e-300});
    const double res_low = std::abs(b * ritz.eigenvectors()(m - 1, 0));
    const double res_high = std::abs(b * ritz.eigenvectors()(m - 1, m - 1));
    const bool exhausted = b <= 1e-12 * scale || m == n;
    const bool done = exhausted || (m >= 2 && res_low <= tol * scale && res_high <= tol * scale);
    out.iterations = static_cast<int>(m);
    if (done || m == limit) {
      out.smallest = theta(0);
      out.largest = theta(m - 1);
      out.smallest_vector = basis.leftCols(m) * ritz.eigenvectors().col(0);
      out.largest_vector = basis.leftCols(m) * ritz.eigenvectors().col(m - 1);
      out.smallest_vector.normalize();
      out.largest_vector.normalize();
      out.converged = done;
      return out;
    }
    beta.push_back(b);
    q = w / b;
  }
  return out;
}

struct OperatorNormEstimate {
  double value = 0;
  Vector vector;  // eigenvector attaining the norm
  bool converged = false;
};

/// Spectral norm of a symmetric operator to relative accuracy `tol`.
template <SymmetricOperator Op>
OperatorNormEstimate operator_norm(const Op& op, double tol, Rng& rng) {
  require(tol > 0, "operator_norm: tol must be positive");
  const ExtremeEigenpairs e = lanczos_extremes(op, rng, tol);
  OperatorNormEstimate out;
  out.converged = e.converged;
  if (std::abs(e.largest) >= std::abs(e.smallest)) {
    out.value = std::abs(e.largest);
    out.vector = e.largest_vector;
  } else {
    out.value = std::abs(e.smallest);
    out.vector = e.smallest_vector;
  }
  return out;
}

/// Default relative tolerance for spectral-norm estimates.
inline constexpr double kSpectralTolerance = 1e-4;

struct PruneResult {
  std::vector<Vertex> kept;
  std::vector<Vertex> removed;
  double removed_fraction = 0;
  double norm_after = 0;
};

/// Zero out every vertex with more than 20 * alpha neighbors and report the
/// spectral norm of the centered restriction (centered by d / n).
inline PruneResult prune_high_degree(const Graph& graph, double alpha, double d) {
  require(alpha > 0, "prune_high_degree: alpha must be positive");
  PruneResult out;
  const double cap = 20.0 * alpha;
  for (Vertex v = 0; v < graph.n(); ++v) {
    (static_cast<double>(graph.degree(v)) <= cap ? out.kept : out.removed).push_back(v);
  }
  out.removed_fraction = graph.n() == 0 ? 0.0 : static_cast<double>(out.removed.size()) / graph.n();
  if (!out.kept.empty()) {
    const CenteredMatrix restricted = center_adjacency(graph, d).restrict(out.kept);
    Rng rng(0x5eed5eedULL);  // fixed: the result is a function of the graph alone
    out.norm_after = operator_norm(restricted, kSpectralTolerance, rng).value;
  }
  return out;
}

}  // namespace ksrobust
