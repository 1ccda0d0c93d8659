#pragma once

// The diagonal-constrained ("basic") SDP
//
//   SDP(M) = max { <M, X> : X psd, X_ii = 1 },
//
// solved over low-rank factors X = V V^T with unit-norm rows by Riemannian
// gradient ascent on the product of spheres (Barzilai-Borwein steps with a
// nonmonotone Armijo safeguard), plus the Grothendieck-norm embedding and
// exact enumeration oracles used to sandwich the relaxation.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ksrobust/error.hpp"
#include "ksrobust/operators.hpp"
#include "ksrobust/rng.hpp"
#include "ksrobust/spectral.hpp"

namespace ksrobust {

using Clock = std::chrono::steady_clock;

struct SolverOptions {
  int rank = 0;  // 0 selects max(8, ceil(sqrt(2n)))
  int restarts = 5;
  int max_iters = 5000;
  double rel_tol = 1e-9;  // relative objective change over `window` iterations
  int window = 50;
  std::uint64_t seed = 1;
  bool certify = true;
  std::optional<Clock::time_point> deadline;
};

inline int default_rank(Index n) {
  return std::max(8, static_cast<int>(std::ceil(std::sqrt(2.0 * static_cast<double>(n)))));
}

struct SdpSolution {
  double value = 0;
  Matrix factor;  // n x r, unit-norm rows
  double dual_gap = 0;
  int iterations = 0;
  bool converged = true;
};

namespace detail {

inline void normalize_rows(Matrix& v) {
  for (Index i = 0; i < v.rows(); ++i) {
    const double norm = v.row(i).norm();
    if (norm > 0) {
      v.row(i) /= norm;
    } else {
      v.row(i).setZero();
      v(i, 0) = 1.0;
    }
  }
}

inline Matrix random_unit_rows(Index n, int rank, Rng& rng) {
  Matrix v(n, rank);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < rank; ++k) v(i, k) = rng.normal();
  normalize_rows(v);
  return v;
}

inline void check_deadline(const SolverOptions& opts) {
  if (opts.deadline && Clock::now() > *opts.deadline) {
    throw Error(ErrorCode::kTimeout, "SDP solve exceeded its wall-clock budget");
  }
}

// Riemannian gradient: the component of 2 M V orthogonal to each row of V.
inline void tangent_gradient(const Matrix& v, const Matrix& mv, Matrix& grad) {
  grad = 2.0 * mv;
  const Vector radial = (grad.cwiseProduct(v)).rowwise().sum();
  grad -= radial.asDiagonal() * v;
}

struct AscentResult {
  Matrix factor;
  double value = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

template <SymmetricOperator Op>
AscentResult ascend(const Op& op, Matrix v, const SolverOptions& opts) {
  constexpr double kArmijo = 1e-4;
  constexpr double kReferenceWeight = 0.85;  // Zhang-Hager averaging
  constexpr int kMaxBacktracks = 40;

  AscentResult out;
  Matrix mv, grad, candidate, mv_candidate, grad_candidate;
  op.apply(v, mv);
  double value = mv.cwiseProduct(v).sum();
  tangent_gradient(v, mv, grad);

  double step = 1.0 / std::max(1e-12, mv.rowwise().norm().maxCoeff());
  double reference = value;
  double q = 1.0;
  std::vector<double> history{value};

  int it = 0;
  for (; it < opts.max_iters; ++it) {
    check_deadline(opts);
    const double grad_sq = grad.squaredNorm();
    if (grad_sq <= 1e-24 * (1.0 + value * value)) {
      out.converged = true;
      break;
    }
    double value_candidate = 0;
    int backtracks = 0;
    for (;; ++backtracks) {
      candidate = v + step * grad;
      normalize_rows(candidate);
      op.apply(candidate, mv_candidate);
      value_candidate = mv_candidate.cwiseProduct(candidate).sum();
      if (value_candidate >= reference + kArmijo * step * grad_sq || backtracks >= kMaxBacktracks) break;
      step *= 0.5;
    }
    tangent_gradient(candidate, mv_candidate, grad_candidate);

    // Barzilai-Borwein step for the minimization of -f, alternating the
    // two classical formulas.
    const Matrix s = candidate - v;
    const Matrix y = grad - grad_candidate;
    const double sy = s.cwiseProduct(y).sum();
    double next = step * 2.0;
    if (sy > 0) {
      next = (it % 2 == 0) ? s.squaredNorm() / sy : sy / y.squaredNorm();
    }
    step = std::clamp(next, 1e-12, 1e12);

    v.swap(candidate);
    mv.swap(mv_candidate);
    grad.swap(grad_candidate);
    value = value_candidate;

    const double q_next = kReferenceWeight * q + 1.0;
    reference = (kReferenceWeight * q * reference + value) / q_next;
    q = q_next;

    history.push_back(value);
    const std::size_t k = history.size() - 1;
    if (k >= static_cast<std::size_t>(opts.window)) {
      const double past = history[k - static_cast<std::size_t>(opts.window)];
      if (std::abs(value - past) <= opts.rel_tol * std::max(std::abs(value), 1e-300)) {
        out.converged = true;
        ++it;
        break;
      }
    }
  }
  out.iterations = it;
  out.value = value;
  out.factor = std::move(v);
  return out;
}

}  // namespace detail

/// Upper-bound gap of a unit-row factor: with lambda_i = (M X)_ii, the
/// vector y = lambda + max(0, lambda_max(M - Diag(lambda))) 1 is dual
/// feasible, so sum(y) - <M, X> bounds the distance to SDP(M).
template <SymmetricOperator Op>
double certify_optimality(const Op& op, const Matrix& factor, double value, std::uint64_t seed = 7) {
  const Index n = op.size();
  require(factor.rows() == n, "certify_optimality: factor has wrong row count");
  for (Index i = 0; i < n; ++i) {
    require(std::abs(factor.row(i).norm() - 1.0) <= 1e-6, "certify_optimality: factor rows must be unit norm");
  }
  Matrix mv;
  op.apply(factor, mv);
  const Vector lambda = mv.cwiseProduct(factor).rowwise().sum();
  const DiagonalShift<Op> shifted(op, lambda);
  double top;
  if (n <= 64) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(to_dense(shifted), Eigen::EigenvaluesOnly);
    top = eig.eigenvalues()(n - 1);
  } else {
    Rng rng(seed);
    const ExtremeEigenpairs e = lanczos_extremes(shifted, rng, 1e-8, 400);
    top = e.largest;
  }
  return static_cast<double>(n) * std::max(0.0, top) + lambda.sum() - value;
}

template <SymmetricOperator Op>
double certify_optimality(const Op& op, const SdpSolution& sol) {
  return certify_optimality(op, sol.factor, sol.value);
}

/// Basic SDP by low-rank Riemannian ascent with random restarts. A warm
/// start, when given, replaces the first random initialization.
template <SymmetricOperator Op>
SdpSolution solve_basic_sdp(const Op& op, const SolverOptions& opts, const Matrix* warm_start = nullptr) {
  require(opts.restarts >= 1, "solver needs at least one restart");
  const Index n = op.size();
  SdpSolution best;
  if (n == 0) return best;
  const int rank = opts.rank > 0 ? opts.rank : default_rank(n);
  Rng rng(opts.seed);
  best.value = -std::numeric_limits<double>::infinity();
  best.converged = false;
  int total_iterations = 0;
  for (int attempt = 0; attempt < opts.restarts; ++attempt) {
    Matrix start;
    if (attempt == 0 && warm_start != nullptr && warm_start->rows() == n) {
      start = *warm_start;
      detail::normalize_rows(start);
    } else {
      start = detail::random_unit_rows(n, rank, rng);
    }
    detail::AscentResult run = detail::ascend(op, std::move(start), opts);
    total_iterations += run.iterations;
    if (run.value > best.value) {
      best.value = run.value;
      best.factor = std::move(run.factor);
      best.converged = run.converged;
    }
  }
  best.iterations = total_iterations;
  if (opts.certify) best.dual_gap = certify_optimality(op, best.factor, best.value, opts.seed ^ 0xD1A1ULL);
  return best;
}

/// Basic SDP of the principal submatrix on `subset` (solved in its own
/// |S|-dimensional space). Empty subsets have value 0.
template <RestrictableOperator Op>
SdpSolution sdp_submatrix(const Op& op, std::span<const Vertex> subset, const SolverOptions& opts) {
  if (subset.empty()) return SdpSolution{};
  return solve_basic_sdp(op.restrict(subset), opts);
}

/// Grothendieck norm max sum_ij M_ij <u_i, v_j> over unit vectors, through
/// the symmetrized 2n x 2n block embedding.
inline SdpSolution grothendieck_solution(const DenseMatrix& m, const SolverOptions& opts) {
  return solve_basic_sdp(BipartiteEmbedding(m), opts);
}

inline double grothendieck_norm(const DenseMatrix& m, const SolverOptions& opts) {
  return grothendieck_solution(m, opts).value;
}

inline constexpr Index kBruteForceLimit = 22;

/// max over x, y in {+-1}^n of x^T M y, enumerating x in Gray-code order
/// and choosing y coordinate-wise.
inline double inf_to_one_norm_bruteforce(const DenseMatrix& m) {
  require(m.rows() == m.cols(), "inf_to_one_norm_bruteforce needs a square matrix");
  const Index n = m.rows();
  if (n > kBruteForceLimit) {
    throw Error(ErrorCode::kBudgetExceeded, "inf_to_one_norm_bruteforce supports n <= 22");
  }
  if (n == 0) return 0.0;
  // x and -x give the same value, so x_0 stays +1.
  std::vector<int> x(static_cast<std::size_t>(n), 1);
  Vector column = m.colwise().sum().transpose();  // M^T x
  double best = column.cwiseAbs().sum();
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  for (std::uint64_t k = 1; k < count; ++k) {
    const Index flip = 1 + static_cast<Index>(std::countr_zero(k));
    column -= (2.0 * x[static_cast<std::size_t>(flip)]) * m.row(flip).transpose();
    x[static_cast<std::size_t>(flip)] = -x[static_cast<std::size_t>(flip)];
    best = std::max(best, column.cwiseAbs().sum());
  }
  return best;
}

}  // namespace ksrobust
