#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ksrobust/error.hpp"
#include "ksrobust/model.hpp"
#include "ksrobust/operators.hpp"
#include "ksrobust/rng.hpp"

namespace ksrobust {

/// Both constraints of a program point, evaluated.
struct FeasibilityReport {
  double objective = 0;
  double objective_threshold = 0;
  double spectral = 0;
  double spectral_threshold = 0;
  double objective_tolerance = 0;
  double spectral_tolerance = 0;
  bool feasible = false;

  double objective_slack() const { return objective - objective_threshold; }
  double spectral_slack() const { return spectral_threshold - spectral; }
};

inline void to_json(nlohmann::json& j, const FeasibilityReport& r) {
  j = nlohmann::json{{"objective", r.objective},
                     {"objective_threshold", r.objective_threshold},
                     {"spectral", r.spectral},
                     {"spectral_threshold", r.spectral_threshold},
                     {"feasible", r.feasible}};
}

struct Estimate {
  SignVector labels;
  double objective = 0;  // x^T M x of the selected candidate
  int trials_used = 0;
  std::optional<double> overlap_sq_frac;
  std::optional<FeasibilityReport> feasibility;
  bool low_confidence = false;
};

inline void to_json(nlohmann::json& j, const Estimate& e) {
  j = nlohmann::json{{"labels", e.labels}, {"objective", e.objective}, {"trials_used", e.trials_used},
                     {"low_confidence", e.low_confidence}};
  if (e.overlap_sq_frac) j["overlap_sq_frac"] = *e.overlap_sq_frac;
  if (e.feasibility) {
    j["feasible"] = e.feasibility->feasible;
    j["objective_value"] = e.feasibility->objective;
    j["spectral"] = e.feasibility->spectral;
    j["feasibility"] = *e.feasibility;
  }
}

/// <xhat, xstar>^2 / n^2.
inline double evaluate_overlap(const SignVector& xhat, const SignVector& xstar) {
  require(xhat.size() == xstar.size(), "evaluate_overlap: length mismatch");
  require(!xhat.empty(), "evaluate_overlap: empty vectors");
  long long dot = 0;
  for (std::size_t i = 0; i < xhat.size(); ++i) dot += xhat[i] * xstar[i];
  const double n = static_cast<double>(xhat.size());
  return static_cast<double>(dot) * static_cast<double>(dot) / (n * n);
}

inline double evaluate_overlap(const SignVector& xhat, const LabelVector& xstar) {
  return evaluate_overlap(xhat, xstar.entries());
}

inline constexpr int kDefaultRoundingTrials = 50;

/// sign(V g) for independent standard Gaussian g, with sign(0) = +1.
inline std::vector<SignVector> gaussian_sign_rounding(const Matrix& factor, int trials, Rng& rng) {
  require(trials >= 1, "rounding needs at least one trial");
  const Index n = factor.rows();
  const Index r = factor.cols();
  std::vector<SignVector> out;
  out.reserve(static_cast<std::size_t>(trials));
  Vector g(r);
  for (int t = 0; t < trials; ++t) {
    for (Index k = 0; k < r; ++k) g(k) = rng.normal();
    const Vector projection = factor * g;
    SignVector x(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = projection(i) >= 0 ? 1 : -1;
    out.push_back(std::move(x));
  }
  return out;
}

template <SymmetricOperator Op>
double quadratic_form(const Op& op, const SignVector& x) {
  require(static_cast<Index>(x.size()) == op.size(), "quadratic_form: dimension mismatch");
  Matrix v(op.size(), 1), mv;
  for (Index i = 0; i < op.size(); ++i) v(i, 0) = x[static_cast<std::size_t>(i)];
  op.apply(v, mv);
  return mv.col(0).dot(v.col(0));
}

/// The candidate with the largest x^T M x; the first one wins ties.
template <SymmetricOperator Op>
Estimate select_estimate(const std::vector<SignVector>& candidates, const Op& op) {
  require(!candidates.empty(), "select_estimate: no candidates");
  Estimate best;
  best.objective = -std::numeric_limits<double>::infinity();
  for (const SignVector& x : candidates) {
    const double score = quadratic_form(op, x);
    if (score > best.objective) {
      best.objective = score;
      best.labels = x;
    }
  }
  best.trials_used = static_cast<int>(candidates.size());
  return best;
}

}  // namespace ksrobust
