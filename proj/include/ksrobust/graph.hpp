#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ksrobust/error.hpp"

namespace ksrobust {

using Vertex = std::uint32_t;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  auto operator<=>(const Edge&) const = default;
};

/// Undirected simple graph. Edges are stored once as (u, v) with u < v,
/// sorted lexicographically; a CSR neighbor table backs degree and
/// neighborhood queries. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Accepts edges in either orientation. Self-loops, duplicates and
  /// out-of-range endpoints are rejected.
  Graph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    for (Edge& e : edges_) {
      require(e.u < n_ && e.v < n_, "edge endpoint out of range");
      require(e.u != e.v, "self-loop on vertex " + std::to_string(e.u));
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end());
    for (std::size_t i = 1; i < edges_.size(); ++i) {
      require(edges_[i] != edges_[i - 1],
              "duplicate edge {" + std::to_string(edges_[i].u) + "," +
                  std::to_string(edges_[i].v) + "}");
    }
    build_adjacency();
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const Vertex> neighbors(Vertex v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }

  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

  std::size_t max_degree() const {
    std::size_t best = 0;
    for (Vertex v = 0; v < n_; ++v) best = std::max(best, degree(v));
    return best;
  }

  double average_degree() const {
    return n_ == 0 ? 0.0 : 2.0 * static_cast<double>(edges_.size()) / n_;
  }

  bool has_edge(Vertex u, Vertex v) const {
    if (u >= n_ || v >= n_) return false;
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  /// Subgraph induced by `keep`; vertex keep[i] becomes vertex i.
  Graph induced(std::span<const Vertex> keep) const {
    std::vector<std::int64_t> position(n_, -1);
    for (std::size_t i = 0; i < keep.size(); ++i) {
      require(keep[i] < n_, "induced: vertex out of range");
      require(position[keep[i]] < 0, "induced: repeated vertex");
      position[keep[i]] = static_cast<std::int64_t>(i);
    }
    std::vector<Edge> kept;
    for (const Edge& e : edges_) {
      if (position[e.u] >= 0 && position[e.v] >= 0) {
        kept.push_back({static_cast<Vertex>(position[e.u]),
                        static_cast<Vertex>(position[e.v])});
      }
    }
    return Graph(keep.size(), std::move(kept));
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  void build_adjacency() {
    offsets_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    adjacency_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    // Sorted edge order makes every neighbor list come out sorted.
    for (const Edge& e : edges_) adjacency_[fill[e.u]++] = e.v;
    for (const Edge& e : edges_) adjacency_[fill[e.v]++] = e.u;
    for (Vertex v = 0; v < n_; ++v) {
      std::sort(adjacency_.begin() + offsets_[v], adjacency_.begin() + offsets_[v + 1]);
    }
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Vertex> adjacency_;
};

}  // namespace ksrobust
