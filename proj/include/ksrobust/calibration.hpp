#pragma once

// Empirical constants for the programs. The shipped table is produced by
// `ksrobust calibrate` (see README) on seeds disjoint from the acceptance
// and test seeds; lookups fall back to the nearest signal strength at the
// same size.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ksrobust/model.hpp"
#include "ksrobust/recover_dense.hpp"
#include "ksrobust/rng.hpp"
#include "ksrobust/sdp.hpp"
#include "ksrobust/spectral.hpp"
#include "ksrobust/z2.hpp"

namespace ksrobust {

inline constexpr int kCalibrationVersion = 1;
inline constexpr std::uint64_t kCalibrationSeed = 0xCA11B8A7EULL;

inline constexpr double kDefaultCs = 3.0;
inline constexpr double kDefaultBeta = 0.02;

struct DenseCalibration {
  std::size_t n = 0;
  double d = 0;
  double delta = 0;
  double mu = 0;
  double beta = kDefaultBeta;
  double null_level = 2.0;    // mean program objective / ((1-mu-beta) n sqrt d) at eps = 0
  double signal_level = 2.0;  // same at the target delta
  double push_in_level = 2.0; // SDP((Ã - (eps d / n) X*)_S) on the same scale
  double Delta = 0;           // 0.8 * (signal_level - null_level)
  double rho = 0;             // 1.2 * max(0, push_in_level - null_level)
  int seeds = 0;
};

struct Z2Calibration {
  std::size_t n = 0;
  double mu = 0;
  double sigma = 0;
  double null_level = 2.0;    // mean objective / ((1-mu)^2 n^2) at sigma = 0
  double signal_level = 2.0;  // same at sigma
  double Delta = 0;           // 0.8 * (signal_level - null_level)
  int seeds = 0;
};

struct PruningCalibration {
  std::size_t n = 0;
  double d = 0;
  double delta = 0;
  double norm_q95 = 0;     // 95th percentile of norm_after / sqrt(d)
  double removed_q95 = 0;  // 95th percentile of removed_fraction
  int seeds = 0;
};

inline void to_json(nlohmann::json& j, const DenseCalibration& c) {
  j = nlohmann::json{{"n", c.n}, {"d", c.d}, {"delta", c.delta}, {"mu", c.mu}, {"beta", c.beta},
                     {"null_level", c.null_level}, {"signal_level", c.signal_level},
                     {"push_in_level", c.push_in_level}, {"Delta", c.Delta}, {"rho", c.rho}, {"seeds", c.seeds}};
}

inline void to_json(nlohmann::json& j, const Z2Calibration& c) {
  j = nlohmann::json{{"n", c.n}, {"mu", c.mu}, {"sigma", c.sigma}, {"null_level", c.null_level},
                     {"signal_level", c.signal_level}, {"Delta", c.Delta}, {"seeds", c.seeds}};
}

inline void to_json(nlohmann::json& j, const PruningCalibration& c) {
  j = nlohmann::json{{"n", c.n}, {"d", c.d}, {"delta", c.delta}, {"norm_q95", c.norm_q95},
                     {"removed_q95", c.removed_q95}, {"seeds", c.seeds}};
}

// clang-format off
inline const std::vector<DenseCalibration>& dense_calibration_table() {
  static const std::vector<DenseCalibration> table = {
      {1000, 40.0, 1.0, 0.0, 0.02, 1.808636142504649, 1.8570635483752589, 1.8073039843176126, 0.03874192469648783, 0.0, 20},
      {1000, 40.0, 1.0, 0.02, 0.02, 1.7960678456440102, 1.8498616247177861, 1.7971413908445082, 0.043035023259020734, 0.0012882542405975527, 20},
  };
  return table;
}

inline const std::vector<Z2Calibration>& z2_calibration_table() {
  static const std::vector<Z2Calibration> table = {
      {500, 0.0, 1.5, 1.8423236208650042, 1.9091798602836718, 0.05348499153493407, 20},
      {500, 0.02, 1.5, 1.867504171331, 1.943608704402586, 0.06088362645726875, 20},
      {500, 0.05, 2.0, 1.9055629459786616, 2.246499301764726, 0.2727490846288516, 20},
  };
  return table;
}

inline const std::vector<PruningCalibration>& pruning_calibration_table() {
  static const std::vector<PruningCalibration> table = {
      {2000, 20.0, 1.0, 2.1831709061244418, 0.0, 20},
      {2000, 40.0, 1.0, 2.141418298345407, 0.0, 20},
      {2000, 80.0, 1.0, 2.1262090325031697, 0.0, 20},
  };
  return table;
}
// clang-format on

namespace detail {

inline bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

inline double mean_of(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double upper_quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace detail

/// Entry with matching (n, d, mu, beta) whose delta is nearest; only
/// entries above the threshold carry a positive margin.
inline std::optional<DenseCalibration> lookup_dense_calibration(std::size_t n, double d, double delta, double mu,
                                                                double beta) {
  std::optional<DenseCalibration> best;
  for (const auto& c : dense_calibration_table()) {
    if (c.n != n || !detail::close(c.d, d) || !detail::close(c.mu, mu) || !detail::close(c.beta, beta)) continue;
    if (!best || std::abs(c.delta - delta) < std::abs(best->delta - delta)) best = c;
  }
  return best;
}

/// Entry with matching (n, mu) whose sigma is nearest.
inline std::optional<Z2Calibration> lookup_z2_calibration(std::size_t n, double sigma, double mu) {
  std::optional<Z2Calibration> best;
  for (const auto& c : z2_calibration_table()) {
    if (c.n != n || !detail::close(c.mu, mu)) continue;
    if (!best || std::abs(c.sigma - sigma) < std::abs(best->sigma - sigma)) best = c;
  }
  return best;
}

inline DenseProgramParams dense_params(const DenseCalibration& c, const SolverOptions& solver) {
  DenseProgramParams p;
  p.mu = c.mu;
  p.beta = c.beta;
  p.Delta = c.Delta;
  p.rho = c.rho;
  p.C_s = kDefaultCs;
  p.null_level = c.null_level;
  p.solver = solver;
  return p;
}

inline Z2ProgramParams z2_params(const Z2Calibration& c, double sigma, const SolverOptions& solver) {
  Z2ProgramParams p;
  p.mu = c.mu;
  p.sigma = sigma;
  p.Delta_sigma = c.Delta;
  p.null_level = c.null_level;
  p.solver = solver;
  return p;
}

/// Measures the program levels on uncorrupted instances. The search does
/// not depend on Delta, so a placeholder margin is used while measuring.
inline DenseCalibration calibrate_dense(std::size_t n, double d, double delta, double mu, double beta, int seeds,
                                        std::uint64_t base_seed = kCalibrationSeed) {
  require(delta > 0, "calibration needs a target above the threshold");
  DenseCalibration out{n, d, delta, mu, beta};
  out.seeds = seeds;
  DenseProgramParams probe;
  probe.mu = mu;
  probe.beta = beta;
  const double eps = SbmParams::eps_for_delta(d, delta);
  const double scale = (1.0 - mu - beta) * static_cast<double>(n) * std::sqrt(d);
  std::vector<double> null_levels, signal_levels, push_in_levels;
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t trial_seed = derive_seed(base_seed, static_cast<std::uint64_t>(s));
    Rng rng(trial_seed);
    probe.solver.seed = derive_seed(trial_seed, 1);
    const LabelVector labels = balanced_labels(n, rng);

    const CenteredMatrix signal = center_adjacency(sample_sbm({n, d, eps}, labels, rng), d);
    const ProgramPoint point = solve_program(signal, probe, eps);
    signal_levels.push_back(point.objective / scale);

    const Vector x = labels.as_vector();
    const RankOneUpdate<CenteredMatrix> push_in(signal, -eps * d / static_cast<double>(n), x);
    SolverOptions opts = probe.solver;
    opts.certify = false;
    push_in_levels.push_back(sdp_submatrix(push_in, point.support, opts).value / scale);

    const CenteredMatrix null = center_adjacency(sample_sbm({n, d, 0.0}, labels, rng), d);
    null_levels.push_back(solve_program(null, probe, 0.0).objective / scale);
  }
  out.null_level = detail::mean_of(null_levels);
  out.signal_level = detail::mean_of(signal_levels);
  out.push_in_level = detail::mean_of(push_in_levels);
  out.Delta = 0.8 * (out.signal_level - out.null_level);
  out.rho = 1.2 * std::max(0.0, out.push_in_level - out.null_level);
  return out;
}

inline Z2Calibration calibrate_z2(std::size_t n, double sigma, double mu, int seeds,
                                  std::uint64_t base_seed = kCalibrationSeed) {
  require(sigma > 0, "calibration needs sigma > 0");
  Z2Calibration out{n, mu, sigma};
  out.seeds = seeds;
  Z2ProgramParams probe;
  probe.mu = mu;
  probe.sigma = sigma;
  const double scale = (1.0 - mu) * (1.0 - mu) * static_cast<double>(n) * static_cast<double>(n);
  std::vector<double> null_levels, signal_levels;
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t trial_seed = derive_seed(base_seed ^ 0x22, static_cast<std::uint64_t>(s));
    Rng rng(trial_seed);
    probe.solver.seed = derive_seed(trial_seed, 1);
    const LabelVector labels = balanced_labels(n, rng);
    const Z2Instance signal = sample_z2(n, sigma, labels, rng);
    signal_levels.push_back(solve_z2_program(DenseSymmetric(signal.matrix), probe).objective / scale);
    const Z2Instance null = sample_z2(n, 0.0, labels, rng);
    null_levels.push_back(solve_z2_program(DenseSymmetric(null.matrix), probe).objective / scale);
  }
  out.null_level = detail::mean_of(null_levels);
  out.signal_level = detail::mean_of(signal_levels);
  out.Delta = 0.8 * (out.signal_level - out.null_level);
  return out;
}

inline PruningCalibration calibrate_pruning(std::size_t n, double d, double delta, int seeds,
                                            std::uint64_t base_seed = kCalibrationSeed) {
  PruningCalibration out{n, d, delta};
  out.seeds = seeds;
  const double eps = SbmParams::eps_for_delta(d, delta);
  std::vector<double> norms, removed;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(derive_seed(base_seed ^ 0x9C, static_cast<std::uint64_t>(s)));
    const LabelVector labels = balanced_labels(n, rng);
    const PruneResult r = prune_high_degree(sample_sbm({n, d, eps}, labels, rng), (1.0 + eps) * d, d);
    norms.push_back(r.norm_after / std::sqrt(d));
    removed.push_back(r.removed_fraction);
  }
  out.norm_q95 = detail::upper_quantile(norms, 0.95);
  out.removed_q95 = detail::upper_quantile(removed, 0.95);
  return out;
}

}  // namespace ksrobust
