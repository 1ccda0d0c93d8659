#pragma once

// Node-corruption adversaries for block-model graphs and row/column
// corruption of Z2 matrices. Every strategy touches only pairs with at least
// one corrupted endpoint, so the uncorrupted block is returned untouched.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ksrobust/error.hpp"
#include "ksrobust/graph.hpp"
#include "ksrobust/model.hpp"
#include "ksrobust/rng.hpp"

namespace ksrobust {

struct CorruptionRecord {
  double mu = 0;
  std::vector<Vertex> corrupted;           // sorted
  std::vector<std::uint8_t> uncorrupted;   // s_i = 1 iff i is not corrupted
  std::string strategy;

  std::vector<Vertex> uncorrupted_set() const {
    std::vector<Vertex> out;
    for (std::size_t i = 0; i < uncorrupted.size(); ++i)
      if (uncorrupted[i]) out.push_back(static_cast<Vertex>(i));
    return out;
  }
};

inline void to_json(nlohmann::json& j, const CorruptionRecord& r) {
  j = nlohmann::json{{"mu", r.mu}, {"corrupted", r.corrupted}, {"strategy", r.strategy}};
}

inline void from_json(const nlohmann::json& j, CorruptionRecord& r) {
  r.mu = j.at("mu").get<double>();
  r.corrupted = j.at("corrupted").get<std::vector<Vertex>>();
  r.strategy = j.at("strategy").get<std::string>();
  std::sort(r.corrupted.begin(), r.corrupted.end());
}

enum class NodeStrategy { kStealthRewire, kDegreeFlood, kSignFlip };
enum class Z2Strategy { kAntiSignal, kZeroOut, kSpikePlant };

inline NodeStrategy parse_node_strategy(std::string_view tag) {
  if (tag == "stealth-rewire") return NodeStrategy::kStealthRewire;
  if (tag == "degree-flood") return NodeStrategy::kDegreeFlood;
  if (tag == "sign-flip") return NodeStrategy::kSignFlip;
  throw Error(ErrorCode::kInvalidParameter, "unknown node adversary '" + std::string(tag) + "'");
}

inline Z2Strategy parse_z2_strategy(std::string_view tag) {
  if (tag == "anti-signal") return Z2Strategy::kAntiSignal;
  if (tag == "zero-out") return Z2Strategy::kZeroOut;
  if (tag == "spike-plant") return Z2Strategy::kSpikePlant;
  throw Error(ErrorCode::kInvalidParameter, "unknown Z2 adversary '" + std::string(tag) + "'");
}

/// Exactly floor(mu * n) vertices chosen uniformly.
inline CorruptionRecord draw_corruption(std::size_t n, double mu, std::string_view strategy, Rng& rng) {
  require(mu >= 0 && mu < 1, "mu must lie in [0, 1)");
  CorruptionRecord record;
  record.mu = mu;
  record.strategy = std::string(strategy);
  const auto count = static_cast<std::uint32_t>(std::floor(mu * static_cast<double>(n)));
  record.corrupted = rng.sample_without_replacement(static_cast<std::uint32_t>(n), count);
  std::sort(record.corrupted.begin(), record.corrupted.end());
  record.uncorrupted.assign(n, 1);
  for (Vertex v : record.corrupted) record.uncorrupted[v] = 0;
  return record;
}

namespace detail {

inline std::pair<double, double> empirical_block_densities(const Graph& graph, const LabelVector& labels) {
  double same_edges = 0, diff_edges = 0;
  for (const Edge& e : graph.edges()) (labels[e.u] == labels[e.v] ? same_edges : diff_edges) += 1;
  double plus = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) plus += labels[i] > 0;
  const double minus = static_cast<double>(labels.size()) - plus;
  const double same_pairs = plus * (plus - 1) / 2 + minus * (minus - 1) / 2;
  const double diff_pairs = plus * minus;
  return {same_pairs > 0 ? same_edges / same_pairs : 0.0, diff_pairs > 0 ? diff_edges / diff_pairs : 0.0};
}

}  // namespace detail

inline std::pair<Graph, CorruptionRecord> corrupt_nodes(const Graph& graph, const LabelVector& labels,
                                                        std::string_view strategy, double mu, Rng& rng) {
  const NodeStrategy kind = parse_node_strategy(strategy);
  const std::size_t n = graph.n();
  require(labels.size() == n, "labels length differs from the graph");
  CorruptionRecord record = draw_corruption(n, mu, strategy, rng);
  if (record.corrupted.empty()) return {graph, std::move(record)};

  std::vector<Edge> edges;
  edges.reserve(graph.num_edges());
  for (const Edge& e : graph.edges())
    if (record.uncorrupted[e.u] && record.uncorrupted[e.v]) edges.push_back(e);

  // Pairs with a corrupted endpoint are collected in a set since two
  // corrupted vertices may both pick each other.
  std::set<Edge> added;
  auto add = [&](Vertex a, Vertex b) {
    if (a != b) added.insert(a < b ? Edge{a, b} : Edge{b, a});
  };

  switch (kind) {
    case NodeStrategy::kStealthRewire: {
      const double d = graph.average_degree();
      std::vector<Vertex> plus, minus;
      for (Vertex i = 0; i < n; ++i) (labels[i] > 0 ? plus : minus).push_back(i);
      for (Vertex v : record.corrupted) {
        const auto& other = labels[v] > 0 ? minus : plus;
        const auto k = std::min<std::uint64_t>(rng.poisson(d), other.size());
        for (auto idx : rng.sample_without_replacement(static_cast<std::uint32_t>(other.size()),
                                                       static_cast<std::uint32_t>(k)))
          add(v, other[idx]);
      }
      break;
    }
    case NodeStrategy::kDegreeFlood: {
      const auto k = static_cast<std::uint32_t>(n / 2);
      for (Vertex v : record.corrupted) {
        // Draw from the n - 1 other vertices, skipping v itself.
        for (auto idx : rng.sample_without_replacement(static_cast<std::uint32_t>(n - 1), k))
          add(v, idx >= v ? idx + 1 : idx);
      }
      break;
    }
    case NodeStrategy::kSignFlip: {
      const auto [p_same, p_diff] = detail::empirical_block_densities(graph, labels);
      auto flipped = [&](Vertex i) { return record.uncorrupted[i] ? labels[i] : -labels[i]; };
      for (Vertex v : record.corrupted) {
        for (Vertex u = 0; u < n; ++u) {
          // Corrupted-corrupted pairs are drawn once, from the lower index.
          if (u == v || (!record.uncorrupted[u] && u < v)) continue;
          const double p = flipped(u) == flipped(v) ? p_same : p_diff;
          if (rng.uniform() < p) add(v, u);
        }
      }
      break;
    }
  }
  edges.insert(edges.end(), added.begin(), added.end());
  return {Graph(n, std::move(edges)), std::move(record)};
}

struct ErasureResult {
  Graph graph;
  std::vector<Vertex> index_map;  // new vertex i was original vertex index_map[i]
};

/// Deletes a uniformly random floor(mu * n) vertices and reindexes the rest
/// in increasing original order.
inline ErasureResult erasure_adversary(const Graph& graph, double mu, Rng& rng) {
  require(mu >= 0 && mu < 1, "mu must lie in [0, 1)");
  const CorruptionRecord removed = draw_corruption(graph.n(), mu, "erasure", rng);
  ErasureResult out;
  out.index_map = removed.uncorrupted_set();
  out.graph = graph.induced(out.index_map);
  return out;
}

inline std::pair<Z2Instance, CorruptionRecord> corrupt_z2(const Z2Instance& inst, std::string_view strategy,
                                                          double mu, Rng& rng) {
  const Z2Strategy kind = parse_z2_strategy(strategy);
  const std::size_t n = inst.n;
  CorruptionRecord record = draw_corruption(n, mu, strategy, rng);
  Z2Instance out = inst;
  if (record.corrupted.empty()) return {std::move(out), std::move(record)};

  const double scale = std::sqrt(static_cast<double>(n));
  SignVector fake(n);
  if (kind == Z2Strategy::kSpikePlant)
    for (auto& y : fake) y = rng.bernoulli(0.5) ? 1 : -1;

  // Visit each affected unordered pair once: (i corrupted, all j) with
  // corrupted-corrupted pairs taken only for j >= i.
  for (Vertex i : record.corrupted) {
    for (Index j = 0; j < static_cast<Index>(n); ++j) {
      const auto uj = static_cast<Vertex>(j);
      if (!record.uncorrupted[uj] && uj < i) continue;
      const double noise_scale = uj == i ? std::sqrt(2.0) * scale : scale;
      double value = 0;
      switch (kind) {
        case Z2Strategy::kAntiSignal:
          value = -inst.sigma * inst.labels[i] * inst.labels[uj] + noise_scale * rng.normal();
          break;
        case Z2Strategy::kZeroOut:
          value = 0;
          break;
        case Z2Strategy::kSpikePlant:
          value = inst.sigma * fake[i] * fake[uj] + noise_scale * rng.normal();
          break;
      }
      out.matrix(i, j) = value;
      out.matrix(j, i) = value;
    }
  }
  return {std::move(out), std::move(record)};
}

}  // namespace ksrobust
