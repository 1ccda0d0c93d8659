#pragma once

// Robust Z2 synchronization through the same support/Gram-matrix search as
// the dense block-model program, on the raw (uncentered) matrix.

#include <cmath>

#include "ksrobust/error.hpp"
#include "ksrobust/model.hpp"
#include "ksrobust/operators.hpp"
#include "ksrobust/program.hpp"
#include "ksrobust/rng.hpp"
#include "ksrobust/rounding.hpp"

namespace ksrobust {

struct Z2ProgramParams {
  double mu = 0;
  double sigma = 1.5;
  double Delta_sigma = 0.05;
  // SDP(A_S) / ((1 - mu)^2 n^2) expected at sigma = 0; 2 in the limit.
  double null_level = 2.0;
  // Added to the (sigma + 1/sigma) n cap to absorb finite-n fluctuation of
  // the top eigenvalue.
  double spectral_slack = 0.1;
  SolverOptions solver;
  int rounding_trials = kDefaultRoundingTrials;

  void validate() const {
    require(mu >= 0 && mu < 1, "mu must lie in [0, 1)");
    require(sigma > 0, "sigma must be positive");
    require(Delta_sigma > 0, "Delta_sigma must be positive");
    require(spectral_slack >= 0, "spectral slack must be nonnegative");
    require(rounding_trials >= 1, "rounding needs at least one trial");
  }

  std::size_t support_size(std::size_t n) const {
    return static_cast<std::size_t>(std::floor((1.0 - mu) * static_cast<double>(n)));
  }

  double objective_threshold(std::size_t n) const {
    const double nn = static_cast<double>(n);
    return (null_level + Delta_sigma) * (1.0 - mu) * (1.0 - mu) * nn * nn;
  }

  double spectral_threshold(std::size_t n) const {
    return (sigma + 1.0 / sigma + spectral_slack) * static_cast<double>(n);
  }
};

inline ProgramPoint solve_z2_program(const DenseSymmetric& a, const Z2ProgramParams& params) {
  params.validate();
  const auto n = static_cast<std::size_t>(a.size());
  std::vector<Vertex> everyone(n);
  for (std::size_t i = 0; i < n; ++i) everyone[i] = static_cast<Vertex>(i);
  SearchSettings settings;
  settings.support_size = params.support_size(n);
  settings.spectral_cap = params.spectral_threshold(n);
  settings.swap_budget = default_swap_budget(params.mu, n);
  settings.solver = params.solver;
  return search_program(a, trim_support(a, everyone, settings.support_size), settings);
}

inline FeasibilityReport check_z2_feasibility(const DenseSymmetric& a, const ProgramPoint& point,
                                              const Z2ProgramParams& params) {
  const auto n = static_cast<std::size_t>(a.size());
  return evaluate_point(a, point, params.objective_threshold(n), params.spectral_threshold(n));
}

struct Z2Recovery {
  Estimate estimate;
  ProgramPoint point;
};

inline Z2Recovery recover_z2_detailed(const DenseMatrix& matrix, const Z2ProgramParams& params, Rng& rng,
                                      const LabelVector* truth = nullptr) {
  const DenseSymmetric a(matrix);
  Z2Recovery out;
  out.point = solve_z2_program(a, params);
  const FeasibilityReport report = check_z2_feasibility(a, out.point, params);
  out.estimate = select_estimate(gaussian_sign_rounding(out.point.factor, params.rounding_trials, rng), a);
  out.estimate.feasibility = report;
  out.estimate.low_confidence = !report.feasible;
  if (truth) out.estimate.overlap_sq_frac = evaluate_overlap(out.estimate.labels, *truth);
  return out;
}

inline Estimate recover_z2(const DenseMatrix& matrix, const Z2ProgramParams& params, Rng& rng,
                           const LabelVector* truth = nullptr) {
  return recover_z2_detailed(matrix, params, rng, truth).estimate;
}

}  // namespace ksrobust
