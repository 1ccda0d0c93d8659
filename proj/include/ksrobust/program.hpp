#pragma once

// Alternating search over pairs (X, w): X a unit-diagonal Gram matrix, w the
// indicator of a support S of fixed size. The search maximizes <M_S, X>
// subject to ||M_S||_op <= cap by alternating
//   (a) the basic SDP on M_S with S fixed,
//   (b) leverage-based evictions while the spectral cap is violated,
//   (c) batches of objective-improving swaps with X fixed,
// and keeps the best spectrally admissible point it visits. The search does
// not look at the objective threshold, so feasibility is a pure function of
// where it ends up.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "ksrobust/error.hpp"
#include "ksrobust/operators.hpp"
#include "ksrobust/rng.hpp"
#include "ksrobust/rounding.hpp"
#include "ksrobust/sdp.hpp"
#include "ksrobust/spectral.hpp"

namespace ksrobust {

template <class Op>
concept ProgramOperator = RestrictableOperator<Op> && requires(const Op& op, std::span<const Vertex> s) {
  { op.restricted_row_norms(s) } -> std::same_as<std::vector<double>>;
};

struct ProgramPoint {
  Matrix factor;                  // n x r unit rows; rows off the support are best responses
  std::vector<Vertex> support;    // sorted
  std::vector<std::uint8_t> w;    // indicator of the support
  double objective = 0;           // <M_S, X_S> as reported by the solver
  double spectral = 0;            // ||M_S||_op
  int rounds = 0;
  int swaps = 0;
};

struct SearchSettings {
  std::size_t support_size = 0;
  double spectral_cap = 0;
  int swap_budget = 20;
  SolverOptions solver;
};

inline int default_swap_budget(double mu, std::size_t n) {
  return 4 * static_cast<int>(std::ceil(mu * static_cast<double>(n))) + 20;
}

/// Support of size `size` built from the `preferred` vertices first. Within
/// each group, vertices whose row norm is closest to the median row norm of
/// the preferred group come first; ties go to the lower index.
template <ProgramOperator Op>
std::vector<Vertex> trim_support(const Op& op, const std::vector<Vertex>& preferred, std::size_t size) {
  const auto n = static_cast<std::size_t>(op.size());
  require(size <= n, "support larger than the vertex set");
  std::vector<Vertex> all(n);
  std::iota(all.begin(), all.end(), Vertex{0});
  const std::vector<double> norms = op.restricted_row_norms(all);

  std::vector<std::uint8_t> is_preferred(n, 0);
  for (Vertex v : preferred) is_preferred[v] = 1;
  std::vector<double> pref_norms;
  for (Vertex v : preferred) pref_norms.push_back(norms[v]);
  if (pref_norms.empty()) pref_norms = norms;
  std::nth_element(pref_norms.begin(), pref_norms.begin() + static_cast<std::ptrdiff_t>(pref_norms.size() / 2),
                   pref_norms.end());
  const double median = pref_norms[pref_norms.size() / 2];

  std::vector<Vertex> order = all;
  std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) {
    if (is_preferred[a] != is_preferred[b]) return is_preferred[a] > is_preferred[b];
    return std::abs(norms[a] - median) < std::abs(norms[b] - median);
  });
  order.resize(size);
  std::sort(order.begin(), order.end());
  return order;
}

namespace detail {

struct SearchState {
  std::vector<Vertex> support;
  Matrix factor_s;  // |S| x r, rows in support order
  double value = 0;
  double spectral = 0;
  Vector top_vector;  // eigenvector attaining ||M_S||, support order
};

// M applied to the factor padded with zero rows off the support.
template <ProgramOperator Op>
Matrix padded_product(const Op& op, const std::vector<Vertex>& support, const Matrix& factor_s) {
  Matrix padded = Matrix::Zero(op.size(), factor_s.cols());
  for (std::size_t a = 0; a < support.size(); ++a) padded.row(support[a]) = factor_s.row(static_cast<Index>(a));
  Matrix product;
  op.apply(padded, product);
  return product;
}

inline Matrix extend_factor(const std::vector<Vertex>& support, const Matrix& factor_s, const Matrix& product) {
  Matrix full = product;
  std::vector<std::uint8_t> in(static_cast<std::size_t>(full.rows()), 0);
  for (std::size_t a = 0; a < support.size(); ++a) {
    full.row(support[a]) = factor_s.row(static_cast<Index>(a));
    in[support[a]] = 1;
  }
  for (Index j = 0; j < full.rows(); ++j) {
    if (in[static_cast<std::size_t>(j)]) continue;
    const double norm = full.row(j).norm();
    if (norm > 0) {
      full.row(j) /= norm;
    } else {
      full.row(j).setZero();
      full(j, 0) = 1.0;
    }
  }
  return full;
}

template <ProgramOperator Op>
void measure_spectrum(const Op& op, SearchState& state, std::uint64_t seed) {
  if (state.support.empty()) {
    state.spectral = 0;
    state.top_vector = Vector();
    return;
  }
  Rng rng(seed);
  const OperatorNormEstimate est = operator_norm(op.restrict(state.support), kSpectralTolerance, rng);
  state.spectral = est.value;
  state.top_vector = est.vector;
}

template <ProgramOperator Op>
void solve_on_support(const Op& op, SearchState& state, const SolverOptions& opts, const Matrix* warm) {
  const SdpSolution sol = solve_basic_sdp(op.restrict(state.support), opts, warm);
  state.factor_s = sol.factor;
  state.value = sol.value;
}

// Factor rows for a new support: retained vertices keep their rows, newly
// admitted ones take their best-response rows.
inline Matrix warm_rows(const std::vector<Vertex>& support, const Matrix& full) {
  Matrix out(static_cast<Index>(support.size()), full.cols());
  for (std::size_t a = 0; a < support.size(); ++a) out.row(static_cast<Index>(a)) = full.row(support[a]);
  return out;
}

}  // namespace detail

template <ProgramOperator Op>
ProgramPoint search_program(const Op& op, std::vector<Vertex> support, const SearchSettings& settings) {
  const auto n = static_cast<std::size_t>(op.size());
  require(support.size() == settings.support_size, "initial support has the wrong size");
  require(settings.spectral_cap > 0, "spectral cap must be positive");
  std::sort(support.begin(), support.end());

  SolverOptions warm_opts = settings.solver;
  warm_opts.restarts = 1;
  warm_opts.certify = false;
  SolverOptions first_opts = settings.solver;
  first_opts.certify = false;

  std::uint64_t spectral_seed = derive_seed(settings.solver.seed, 0x5EC7);
  auto next_seed = [&] { return spectral_seed = splitmix64(spectral_seed); };

  detail::SearchState state;
  state.support = std::move(support);
  detail::solve_on_support(op, state, first_opts, nullptr);
  detail::measure_spectrum(op, state, next_seed());

  const double cap = settings.spectral_cap;
  auto admissible = [&](const detail::SearchState& s) {
    return s.spectral <= cap * (1.0 + kSpectralTolerance);
  };

  std::optional<detail::SearchState> best_ok;
  detail::SearchState best_any = state;
  auto record = [&](const detail::SearchState& s) {
    if (admissible(s) && (!best_ok || s.value > best_ok->value)) best_ok = s;
    if (s.value > best_any.value) best_any = s;
  };
  record(state);

  std::vector<std::uint8_t> tabu(n, 0);
  int swaps = 0;
  int rounds = 1;
  int batch = std::max(1, settings.swap_budget / 4);
  const double scale_floor = 1e-12 * std::max(1.0, std::abs(state.value));

  while (swaps < settings.swap_budget && state.support.size() < n) {
    std::vector<std::uint8_t> in(n, 0);
    for (Vertex v : state.support) in[v] = 1;
    Matrix product = detail::padded_product(op, state.support, state.factor_s);

    // Best excluded, non-tabu vertex by marginal objective ||(M V)_j||.
    auto best_outside = [&]() -> std::optional<Vertex> {
      std::optional<Vertex> pick;
      double best = -1;
      for (Vertex j = 0; j < n; ++j) {
        if (in[j] || tabu[j]) continue;
        const double m = product.row(j).norm();
        if (m > best) {
          best = m;
          pick = j;
        }
      }
      return pick;
    };

    if (!admissible(state)) {
      bool exhausted = false;
      while (!admissible(state) && swaps < settings.swap_budget) {
        const std::vector<double> norms = op.restricted_row_norms(state.support);
        std::size_t evict = 0;
        double top = -1;
        for (std::size_t a = 0; a < state.support.size(); ++a) {
          const double lev = norms[state.support[a]] * std::abs(state.top_vector(static_cast<Index>(a)));
          if (lev > top) {
            top = lev;
            evict = a;
          }
        }
        const auto admit = best_outside();
        if (!admit) {
          exhausted = true;
          break;
        }
        const Vertex out_vertex = state.support[evict];
        tabu[out_vertex] = 1;
        in[out_vertex] = 0;
        in[*admit] = 1;
        // Keep the factor aligned with the support: replace the row in
        // place, then restore sorted order.
        const Matrix full = detail::extend_factor(state.support, state.factor_s, product);
        state.support[evict] = *admit;
        std::sort(state.support.begin(), state.support.end());
        state.factor_s = detail::warm_rows(state.support, full);
        product = detail::padded_product(op, state.support, state.factor_s);
        detail::measure_spectrum(op, state, next_seed());
        ++swaps;
      }
      const Matrix warm = state.factor_s;
      detail::solve_on_support(op, state, warm_opts, &warm);
      detail::measure_spectrum(op, state, next_seed());
      ++rounds;
      record(state);
      if (!admissible(state) && (exhausted || swaps >= settings.swap_budget)) break;
      continue;
    }

    // Contribution of each member and marginal value of each outsider.
    std::vector<std::pair<double, std::size_t>> members;
    for (std::size_t a = 0; a < state.support.size(); ++a) {
      const Vertex v = state.support[a];
      members.push_back({product.row(v).dot(state.factor_s.row(static_cast<Index>(a))), a});
    }
    std::vector<std::pair<double, Vertex>> outsiders;
    for (Vertex j = 0; j < n; ++j)
      if (!in[j] && !tabu[j]) outsiders.push_back({product.row(j).norm(), j});
    std::stable_sort(members.begin(), members.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::stable_sort(outsiders.begin(), outsiders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    const int limit = std::min({batch, settings.swap_budget - swaps, static_cast<int>(outsiders.size()),
                                static_cast<int>(members.size())});
    std::vector<std::pair<std::size_t, Vertex>> planned;
    for (int k = 0; k < limit; ++k) {
      if (outsiders[static_cast<std::size_t>(k)].first - members[static_cast<std::size_t>(k)].first <= scale_floor)
        break;
      planned.push_back({members[static_cast<std::size_t>(k)].second, outsiders[static_cast<std::size_t>(k)].second});
    }
    if (planned.empty()) break;

    const detail::SearchState before = state;
    const Matrix full = detail::extend_factor(state.support, state.factor_s, product);
    for (const auto& [slot, vertex] : planned) {
      tabu[state.support[slot]] = 1;
      state.support[slot] = vertex;
    }
    std::sort(state.support.begin(), state.support.end());
    const Matrix warm = detail::warm_rows(state.support, full);
    detail::solve_on_support(op, state, warm_opts, &warm);
    detail::measure_spectrum(op, state, next_seed());
    swaps += static_cast<int>(planned.size());
    ++rounds;
    record(state);

    if (state.value <= before.value + scale_floor) {
      state = before;
      batch /= 2;
      if (batch == 0) break;
    }
  }

  const detail::SearchState& chosen = best_ok ? *best_ok : best_any;
  ProgramPoint point;
  point.support = chosen.support;
  point.w.assign(n, 0);
  for (Vertex v : chosen.support) point.w[v] = 1;
  point.factor = detail::extend_factor(chosen.support, chosen.factor_s,
                                       detail::padded_product(op, chosen.support, chosen.factor_s));
  point.objective = chosen.value;
  point.spectral = chosen.spectral;
  point.rounds = rounds;
  point.swaps = swaps;
  return point;
}

/// <M_S, X_S> recomputed from the factor rows on the support.
template <ProgramOperator Op>
double support_objective(const Op& op, const ProgramPoint& point) {
  if (point.support.empty()) return 0.0;
  const Matrix rows = detail::warm_rows(point.support, point.factor);
  Matrix product;
  op.restrict(point.support).apply(rows, product);
  return product.cwiseProduct(rows).sum();
}

/// Evaluates both constraints at `point` against explicit thresholds.
template <ProgramOperator Op>
FeasibilityReport evaluate_point(const Op& op, const ProgramPoint& point, double objective_threshold,
                                 double spectral_threshold, std::uint64_t seed = 0x5EC7) {
  require(point.w.size() == static_cast<std::size_t>(op.size()), "program point has the wrong length");
  require(point.factor.rows() == op.size(), "program point factor has the wrong row count");
  FeasibilityReport report;
  report.objective = support_objective(op, point);
  report.objective_threshold = objective_threshold;
  if (!point.support.empty()) {
    Rng rng(seed);
    report.spectral = operator_norm(op.restrict(point.support), kSpectralTolerance, rng).value;
  }
  report.spectral_threshold = spectral_threshold;
  report.objective_tolerance = 1e-9 * std::max(1.0, std::abs(objective_threshold));
  report.spectral_tolerance = kSpectralTolerance * std::max(report.spectral, spectral_threshold);
  report.feasible = report.objective >= objective_threshold - report.objective_tolerance &&
                    report.spectral <= spectral_threshold + report.spectral_tolerance;
  return report;
}

}  // namespace ksrobust
