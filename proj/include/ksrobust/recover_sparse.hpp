#pragma once

// Constant-degree pipeline: repeatedly delete the highest-degree vertex
// together with a uniformly random surviving neighbor until every degree is
// at most C_deg * d, then recover on what remains.

#include <nlohmann/json.hpp>

#include <cmath>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "ksrobust/error.hpp"
#include "ksrobust/graph.hpp"
#include "ksrobust/model.hpp"
#include "ksrobust/operators.hpp"
#include "ksrobust/rng.hpp"
#include "ksrobust/rounding.hpp"
#include "ksrobust/sdp.hpp"

namespace ksrobust {

inline double default_cdeg(double mu) {
  if (mu <= 0.01) return 30.0;
  if (mu <= 0.05) return 20.0;
  return 12.0;
}

inline int default_round_cap(double mu, std::size_t n) {
  return 10 * static_cast<int>(std::ceil(mu * static_cast<double>(n))) + 100;
}

struct SparseParams {
  double C_deg = 30;
  double d = 1;
  double mu = 0;
  int round_cap = 100;
  SolverOptions solver;
  int rounding_trials = kDefaultRoundingTrials;

  static SparseParams defaults(double d, double mu, std::size_t n) {
    SparseParams p;
    p.C_deg = default_cdeg(mu);
    p.d = d;
    p.mu = mu;
    p.round_cap = default_round_cap(mu, n);
    return p;
  }

  void validate() const {
    require(C_deg * d >= 1, "C_deg * d must be at least 1");
    require(round_cap >= 1, "round_cap must be at least 1");
    require(mu >= 0 && mu < 1, "mu must lie in [0, 1)");
  }

  double degree_threshold() const { return C_deg * d; }
};

struct RemovalLog {
  int rounds = 0;
  // (highest-degree vertex, random neighbor); the neighbor is absent when
  // the vertex had no surviving neighbor, which cannot happen while the
  // threshold is positive.
  std::vector<std::pair<Vertex, Vertex>> removed;
  bool cap_hit = false;
};

inline void to_json(nlohmann::json& j, const RemovalLog& log) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [hub, neighbor] : log.removed) pairs.push_back({hub, neighbor});
  j = nlohmann::json{{"rounds", log.rounds}, {"removed", pairs}, {"cap_hit", log.cap_hit}};
}

struct PrunedGraph {
  Graph graph;                      // induced on the survivors
  std::vector<Vertex> survivors;    // survivors[i] is the original index of vertex i
  RemovalLog log;
};

inline PrunedGraph prune_iterative(const Graph& graph, const SparseParams& params, Rng& rng) {
  params.validate();
  require(graph.n() > 0, "prune_iterative needs a nonempty graph");
  const std::size_t n = graph.n();
  const double threshold = params.degree_threshold();

  std::vector<std::size_t> degree(n);
  std::vector<std::uint8_t> alive(n, 1);
  // Max-degree index ordered by (degree desc, vertex asc), updated in place.
  auto cmp = [](const std::pair<std::size_t, Vertex>& a, const std::pair<std::size_t, Vertex>& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::set<std::pair<std::size_t, Vertex>, decltype(cmp)> by_degree(cmp);
  for (Vertex v = 0; v < n; ++v) {
    degree[v] = graph.degree(v);
    by_degree.insert({degree[v], v});
  }

  auto remove_vertex = [&](Vertex v) {
    by_degree.erase({degree[v], v});
    alive[v] = 0;
    for (Vertex u : graph.neighbors(v)) {
      if (!alive[u]) continue;
      by_degree.erase({degree[u], u});
      --degree[u];
      by_degree.insert({degree[u], u});
    }
  };

  PrunedGraph out;
  while (!by_degree.empty() && static_cast<double>(by_degree.begin()->first) > threshold) {
    if (out.log.rounds >= params.round_cap) {
      out.log.cap_hit = true;
      break;
    }
    const Vertex hub = by_degree.begin()->second;
    std::vector<Vertex> live;
    for (Vertex u : graph.neighbors(hub))
      if (alive[u]) live.push_back(u);
    const Vertex partner = live[rng.uniform_int(live.size())];
    remove_vertex(hub);
    remove_vertex(partner);
    out.log.removed.push_back({hub, partner});
    ++out.log.rounds;
  }
  for (Vertex v = 0; v < n; ++v)
    if (alive[v]) out.survivors.push_back(v);
  out.graph = graph.induced(out.survivors);
  return out;
}

struct SparseRecovery {
  Estimate estimate;
  PrunedGraph pruned;
};

/// Prune, then basic SDP plus Gaussian rounding on the survivors. Removed
/// vertices receive independent fair signs.
inline SparseRecovery recover_sparse_detailed(const Graph& graph, const SparseParams& params, double d,
                                              [[maybe_unused]] double eps, Rng& rng,
                                              const LabelVector* truth = nullptr) {
  SparseRecovery out;
  out.pruned = prune_iterative(graph, params, rng);
  const std::size_t n = graph.n();
  SignVector labels(n);
  for (auto& x : labels) x = rng.bernoulli(0.5) ? 1 : -1;

  if (out.pruned.graph.n() > 0) {
    // Keep the centering density d / n of the original graph.
    const CenteredMatrix atil(out.pruned.graph, d / static_cast<double>(n));
    SolverOptions quiet = params.solver;
    quiet.certify = false;
    const SdpSolution sol = solve_basic_sdp(atil, quiet);
    const Estimate inner = select_estimate(gaussian_sign_rounding(sol.factor, params.rounding_trials, rng), atil);
    for (std::size_t i = 0; i < out.pruned.survivors.size(); ++i) labels[out.pruned.survivors[i]] = inner.labels[i];
    out.estimate.objective = inner.objective;
    out.estimate.trials_used = inner.trials_used;
  }
  out.estimate.labels = std::move(labels);
  out.estimate.low_confidence = out.pruned.log.cap_hit;
  if (truth) out.estimate.overlap_sq_frac = evaluate_overlap(out.estimate.labels, *truth);
  return out;
}

inline Estimate recover_sparse(const Graph& graph, const SparseParams& params, double d, double eps, Rng& rng,
                               const LabelVector* truth = nullptr) {
  return recover_sparse_detailed(graph, params, d, eps, rng, truth).estimate;
}

}  // namespace ksrobust
