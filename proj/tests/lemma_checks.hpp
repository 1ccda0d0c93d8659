#pragma once

// Pointwise checks of the submatrix inequalities on a found program point.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ksrobust/model.hpp"
#include "ksrobust/operators.hpp"
#include "ksrobust/program.hpp"
#include "ksrobust/rng.hpp"
#include "ksrobust/sdp.hpp"

namespace lemma {

using namespace ksrobust;

inline double restricted_value(const CenteredMatrix& atil, const Matrix& factor, const std::vector<Vertex>& subset) {
  Matrix rows(static_cast<Index>(subset.size()), factor.cols());
  for (std::size_t a = 0; a < subset.size(); ++a) rows.row(static_cast<Index>(a)) = factor.row(subset[a]);
  Matrix product;
  atil.restrict(subset).apply(rows, product);
  return product.cwiseProduct(rows).sum();
}

struct TransferOutcome {
  double worst_margin = 0;     // min over draws of value(S') - (objective - penalty)
  double tolerance = 0;
  double max_abs_entry = 0;    // over every entry of X = V V^T
  bool holds() const { return worst_margin >= -tolerance && max_abs_entry <= 1 + 1e-8; }
};

/// Draws `draws` random S' inside the support with |S'| = floor((1 - 2 mu - beta) n)
/// and compares <Ã_{S'}, X> with objective - 2 C_s sqrt(d) mu n.
inline TransferOutcome check_transfer(const CenteredMatrix& atil, const ProgramPoint& point, double mu,
                                      double beta, double C_s, int draws, Rng& rng) {
  const auto n = static_cast<double>(atil.size());
  const double d = atil.shift() * n;
  const double objective = support_objective(atil, point);
  const double floor_value = objective - 2 * C_s * std::sqrt(d) * mu * n;
  const auto size = std::min(point.support.size(), static_cast<std::size_t>(std::floor((1 - 2 * mu - beta) * n)));

  TransferOutcome out;
  out.tolerance = 1e-9 * std::max(1.0, std::abs(objective));
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < draws; ++t) {
    std::vector<Vertex> subset = point.support;
    rng.shuffle(subset);
    subset.resize(size);
    std::sort(subset.begin(), subset.end());
    out.worst_margin = std::min(out.worst_margin, restricted_value(atil, point.factor, subset) - floor_value);
  }
  const DenseMatrix gram = point.factor * point.factor.transpose();
  out.max_abs_entry = gram.cwiseAbs().maxCoeff();
  return out;
}

/// Both sides of the uncorrupted-submatrix correlation inequality on
/// S' = support ∩ uncorrupted. The SDP term is bounded from above by the
/// solver value plus its duality gap.
struct CorrelationOutcome {
  double lhs = 0;
  double rhs = 0;
  double tolerance = 0;
  bool holds() const { return lhs >= rhs - tolerance; }
};

inline CorrelationOutcome check_correlation(const CenteredMatrix& atil, const ProgramPoint& point,
                                            const LabelVector& labels, const std::vector<std::uint8_t>& uncorrupted,
                                            double mu, double eps, double C_s, const SolverOptions& solver) {
  const auto n = static_cast<double>(atil.size());
  const double d = atil.shift() * n;
  std::vector<Vertex> shared;
  for (Vertex v : point.support)
    if (uncorrupted[v]) shared.push_back(v);

  Vector xs(static_cast<Index>(shared.size()));
  Matrix rows(static_cast<Index>(shared.size()), point.factor.cols());
  for (std::size_t a = 0; a < shared.size(); ++a) {
    xs(static_cast<Index>(a)) = labels[shared[a]];
    rows.row(static_cast<Index>(a)) = point.factor.row(shared[a]);
  }
  const Vector projected = rows.transpose() * xs;

  const RankOneUpdate<CenteredMatrix> residual(atil, -eps * d / n, labels.as_vector());
  SolverOptions opts = solver;
  opts.certify = true;
  const SdpSolution sdp = sdp_submatrix(residual, shared, opts);

  CorrelationOutcome out;
  out.lhs = projected.squaredNorm();
  const double objective = support_objective(atil, point);
  out.rhs = n / (eps * d) * (objective - 2 * C_s * std::sqrt(d) * mu * n - (sdp.value + std::max(0.0, sdp.dual_gap)));
  out.tolerance = 1e-6 * n * n;
  return out;
}

}  // namespace lemma
