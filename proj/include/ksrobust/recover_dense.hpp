#pragma once

// Dense-regime robust recovery: find a support S of size (1 - mu - beta) n
// and a correlation matrix X with a large SDP value on the centered
// adjacency restricted to S while that restriction stays spectrally small,
// then round X.

#include <cmath>
#include <optional>

#include "ksrobust/error.hpp"
#include "ksrobust/graph.hpp"
#include "ksrobust/model.hpp"
#include "ksrobust/operators.hpp"
#include "ksrobust/program.hpp"
#include "ksrobust/rng.hpp"
#include "ksrobust/rounding.hpp"
#include "ksrobust/sdp.hpp"
#include "ksrobust/spectral.hpp"

namespace ksrobust {

struct DenseProgramParams {
  double mu = 0;
  double beta = 0.02;
  double Delta = 0.05;
  double C_s = 3.0;
  double rho = 0;
  // SDP(Ã_S) / ((1 - mu - beta) n sqrt(d)) expected without community
  // structure. Tends to 2 as n grows; finite n sits noticeably lower, so
  // calibrated runs override it.
  double null_level = 2.0;
  SolverOptions solver;
  int rounding_trials = kDefaultRoundingTrials;

  void validate() const {
    require(mu >= 0 && beta >= 0 && mu + beta < 1, "need mu, beta >= 0 and mu + beta < 1");
    require(Delta > 0, "Delta must be positive");
    require(C_s > 0, "C_s must be positive");
    require(null_level > 0, "null level must be positive");
    require(rounding_trials >= 1, "rounding needs at least one trial");
  }

  std::size_t support_size(std::size_t n) const {
    return static_cast<std::size_t>(std::floor((1.0 - mu - beta) * static_cast<double>(n)));
  }

  double objective_threshold(std::size_t n, double d) const {
    return (null_level + Delta) * (1.0 - mu - beta) * static_cast<double>(n) * std::sqrt(d);
  }

  double spectral_threshold(double d) const { return C_s * std::sqrt(d); }
};

inline double average_degree_of(const CenteredMatrix& atil) {
  return atil.shift() * static_cast<double>(atil.size());
}

/// Alternating search for a feasible point. The initial support is the
/// degree-pruned vertex set trimmed to size by degree anomaly.
inline ProgramPoint solve_program(const CenteredMatrix& atil, const DenseProgramParams& params, double eps) {
  params.validate();
  const std::size_t n = static_cast<std::size_t>(atil.size());
  const double d = average_degree_of(atil);
  const PruneResult pruned = prune_high_degree(atil.graph(), (1.0 + eps) * d, d);
  SearchSettings settings;
  settings.support_size = params.support_size(n);
  settings.spectral_cap = params.spectral_threshold(d);
  settings.swap_budget = default_swap_budget(params.mu, n);
  settings.solver = params.solver;
  return search_program(atil, trim_support(atil, pruned.kept, settings.support_size), settings);
}

inline FeasibilityReport check_feasibility(const CenteredMatrix& atil, const ProgramPoint& point,
                                           const DenseProgramParams& params) {
  const double d = average_degree_of(atil);
  return evaluate_point(atil, point, params.objective_threshold(static_cast<std::size_t>(atil.size()), d),
                        params.spectral_threshold(d));
}

/// Lower bound on <X, X*> implied by feasibility, with the hidden constant
/// of the corrupted-submatrix term set to 2 C_s.
inline double certified_correlation_bound(const DenseProgramParams& params, std::size_t n, double d, double eps) {
  require(d > 0 && eps > 0, "certified_correlation_bound needs d, eps > 0");
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  const double mu = params.mu;
  const double beta = params.beta;
  return ((params.Delta - params.rho) * (1.0 - 2.0 * mu - beta) - 2.0 * params.C_s * mu) * nn / (eps * std::sqrt(d)) -
         2.0 * (2.0 * mu + beta) * nn;
}

struct DenseRecovery {
  Estimate estimate;
  ProgramPoint point;
};

inline DenseRecovery recover_dense_detailed(const Graph& graph, const DenseProgramParams& params, double d,
                                            double eps, Rng& rng, const LabelVector* truth = nullptr) {
  const CenteredMatrix atil = center_adjacency(graph, d);
  DenseRecovery out;
  out.point = solve_program(atil, params, eps);
  const FeasibilityReport report = check_feasibility(atil, out.point, params);
  out.estimate = select_estimate(gaussian_sign_rounding(out.point.factor, params.rounding_trials, rng), atil);
  out.estimate.feasibility = report;
  out.estimate.low_confidence = !report.feasible;
  if (truth) out.estimate.overlap_sq_frac = evaluate_overlap(out.estimate.labels, *truth);
  return out;
}

inline Estimate recover_dense(const Graph& graph, const DenseProgramParams& params, double d, double eps, Rng& rng,
                              const LabelVector* truth = nullptr) {
  return recover_dense_detailed(graph, params, d, eps, rng, truth).estimate;
}

/// Baseline: basic SDP on the whole centered graph, no support selection.
inline Estimate recover_basic_sdp(const Graph& graph, double d, const SolverOptions& opts, int trials, Rng& rng,
                                  const LabelVector* truth = nullptr) {
  const CenteredMatrix atil = center_adjacency(graph, d);
  SolverOptions quiet = opts;
  quiet.certify = false;
  const SdpSolution sol = solve_basic_sdp(atil, quiet);
  Estimate est = select_estimate(gaussian_sign_rounding(sol.factor, trials, rng), atil);
  if (truth) est.overlap_sq_frac = evaluate_overlap(est.labels, *truth);
  return est;
}

}  // namespace ksrobust
