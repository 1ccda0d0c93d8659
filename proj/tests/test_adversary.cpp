#include <gtest/gtest.h>

#include <cmath>

#include "ksrobust/adversary.hpp"
#include "ksrobust/model.hpp"
#include "oracles.hpp"

using namespace ksrobust;

namespace {

struct Instance {
  LabelVector labels;
  Graph graph;
};

Instance make_sbm(std::size_t n, double d, double eps, std::uint64_t seed) {
  Rng rng(seed);
  LabelVector labels = balanced_labels(n, rng);
  Graph g = sample_sbm({n, d, eps}, labels, rng);
  return {std::move(labels), std::move(g)};
}

// Every pair of uncorrupted vertices is an edge in `a` iff it is one in `b`.
void expect_same_on_uncorrupted(const Graph& a, const Graph& b, const CorruptionRecord& r) {
  auto filtered = [&](const Graph& g) {
    std::vector<Edge> out;
    for (const Edge& e : g.edges())
      if (r.uncorrupted[e.u] && r.uncorrupted[e.v]) out.push_back(e);
    return out;
  };
  EXPECT_EQ(filtered(a), filtered(b));
}

}  // namespace

TEST(CorruptNodes, ZeroBudgetIsIdentity) {
  for (const char* tag : {"stealth-rewire", "degree-flood", "sign-flip"}) {
    const Instance inst = make_sbm(200, 10, 0.3, 1);
    Rng rng(2);
    auto [g, record] = corrupt_nodes(inst.graph, inst.labels, tag, 0.0, rng);
    EXPECT_EQ(g, inst.graph);
    EXPECT_TRUE(record.corrupted.empty());
  }
}

TEST(CorruptNodes, StealthRewireKeepsDegreesPlausible) {
  const double d = 40;
  const Instance inst = make_sbm(1000, d, 0.2236, 3);
  Rng rng(4);
  auto [g, record] = corrupt_nodes(inst.graph, inst.labels, "stealth-rewire", 0.05, rng);
  EXPECT_EQ(record.corrupted.size(), 50u);
  for (Vertex v : record.corrupted) EXPECT_LE(static_cast<double>(g.degree(v)), 3 * d);
  expect_same_on_uncorrupted(g, inst.graph, record);
  // Rewired edges of corrupted vertices go to the opposite community.
  for (Vertex v : record.corrupted)
    for (Vertex u : g.neighbors(v))
      if (record.uncorrupted[u]) {
        EXPECT_NE(inst.labels[u], inst.labels[v]);
      }
}

TEST(CorruptNodes, DegreeFloodCreatesHubs) {
  const Instance inst = make_sbm(1000, 20, 0.3, 5);
  Rng rng(6);
  auto [g, record] = corrupt_nodes(inst.graph, inst.labels, "degree-flood", 0.01, rng);
  EXPECT_GE(static_cast<double>(g.max_degree()), 0.4 * 1000);
  expect_same_on_uncorrupted(g, inst.graph, record);
}

TEST(CorruptNodes, SignFlipPreservesUncorruptedBlock) {
  const Instance inst = make_sbm(600, 20, 0.4, 7);
  Rng rng(8);
  auto [g, record] = corrupt_nodes(inst.graph, inst.labels, "sign-flip", 0.1, rng);
  expect_same_on_uncorrupted(g, inst.graph, record);
  // Flipped vertices now connect mostly across communities.
  double same = 0, cross = 0;
  for (Vertex v : record.corrupted)
    for (Vertex u : g.neighbors(v))
      if (record.uncorrupted[u]) (inst.labels[u] == inst.labels[v] ? same : cross) += 1;
  EXPECT_GT(cross, same);
}

TEST(CorruptNodes, UnknownStrategy) {
  const Instance inst = make_sbm(50, 5, 0.2, 9);
  Rng rng(1);
  EXPECT_THROW(corrupt_nodes(inst.graph, inst.labels, "bogus", 0.1, rng), Error);
  EXPECT_THROW(corrupt_nodes(inst.graph, inst.labels, "stealth-rewire", 1.0, rng), Error);
}

TEST(CorruptNodes, StructuralInvariantsAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (const char* tag : {"stealth-rewire", "degree-flood", "sign-flip"}) {
      const Instance inst = make_sbm(300, 12, 0.3, 100 + seed);
      Rng rng(seed);
      const double mu = 0.01 * static_cast<double>(seed + 1) + 0.003;
      auto [g, record] = corrupt_nodes(inst.graph, inst.labels, tag, mu, rng);
      EXPECT_EQ(record.corrupted.size(), static_cast<std::size_t>(std::floor(mu * 300)));
      std::size_t complement = 0;
      for (auto s : record.uncorrupted) complement += s == 0;
      EXPECT_EQ(complement, record.corrupted.size());
      for (Vertex v : record.corrupted) EXPECT_EQ(record.uncorrupted[v], 0);
      expect_same_on_uncorrupted(g, inst.graph, record);
    }
  }
}

TEST(CorruptionRecord, JsonRoundTrip) {
  const Instance inst = make_sbm(100, 8, 0.3, 10);
  Rng rng(11);
  const CorruptionRecord r = corrupt_nodes(inst.graph, inst.labels, "sign-flip", 0.1, rng).second;
  const nlohmann::json j = r;
  EXPECT_EQ(j.at("strategy"), "sign-flip");
  EXPECT_EQ(j.at("corrupted").size(), 10u);
  const CorruptionRecord back = j.get<CorruptionRecord>();
  EXPECT_EQ(back.corrupted, r.corrupted);
  EXPECT_EQ(back.mu, r.mu);
}

TEST(Erasure, ZeroIsIdentity) {
  const Instance inst = make_sbm(100, 8, 0.3, 12);
  Rng rng(1);
  const ErasureResult r = erasure_adversary(inst.graph, 0.0, rng);
  EXPECT_EQ(r.graph, inst.graph);
  for (Vertex i = 0; i < 100; ++i) EXPECT_EQ(r.index_map[i], i);
}

TEST(Erasure, HalfRemovedAndEdgesSurvive) {
  const Instance inst = make_sbm(100, 8, 0.3, 13);
  Rng rng(2);
  const ErasureResult r = erasure_adversary(inst.graph, 0.5, rng);
  EXPECT_EQ(r.graph.n(), 50u);
  for (const Edge& e : r.graph.edges()) EXPECT_TRUE(inst.graph.has_edge(r.index_map[e.u], r.index_map[e.v]));
}

TEST(Erasure, DensityMatchesSubsamplingOracle) {
  const std::size_t n = 400;
  const double d = 10;
  const double mu = 0.3;
  const std::size_t kept = n - static_cast<std::size_t>(std::floor(mu * n));
  double edges = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const Instance inst = make_sbm(n, d, 0.0, 200 + t);
    Rng rng(t);
    edges += static_cast<double>(erasure_adversary(inst.graph, mu, rng).graph.num_edges());
  }
  const double pairs = kept * (kept - 1) / 2.0;
  const auto bin = oracle::binomial(pairs * trials, d / n);
  EXPECT_LE(std::abs(edges - bin.mean), 3 * bin.sd);
}

TEST(CorruptZ2, ZeroBudgetIsIdentity) {
  Rng rng(1);
  const LabelVector labels = balanced_labels(50, rng);
  const Z2Instance inst = sample_z2(50, 1.5, labels, rng);
  for (const char* tag : {"anti-signal", "zero-out", "spike-plant"}) {
    auto [out, record] = corrupt_z2(inst, tag, 0.0, rng);
    EXPECT_EQ(out.matrix, inst.matrix);
  }
}

TEST(CorruptZ2, ZeroOutChangesExactlyTheCorruptedCross) {
  const std::size_t n = 200;
  Rng rng(2);
  const Z2Instance inst = sample_z2(n, 1.5, balanced_labels(n, rng), rng);
  auto [out, record] = corrupt_z2(inst, "zero-out", 0.1, rng);
  const std::size_t k = 20;
  std::size_t changed = 0;
  for (Index i = 0; i < static_cast<Index>(n); ++i)
    for (Index j = 0; j < static_cast<Index>(n); ++j) changed += out.matrix(i, j) != inst.matrix(i, j);
  EXPECT_EQ(changed, 2 * k * n - k * k);
}

TEST(CorruptZ2, UncorruptedBlockAndSymmetryPreserved) {
  const std::size_t n = 150;
  for (const char* tag : {"anti-signal", "zero-out", "spike-plant"}) {
    Rng rng(3);
    const Z2Instance inst = sample_z2(n, 2.0, balanced_labels(n, rng), rng);
    auto [out, record] = corrupt_z2(inst, tag, 0.1, rng);
    for (Index i = 0; i < static_cast<Index>(n); ++i)
      for (Index j = 0; j < static_cast<Index>(n); ++j) {
        EXPECT_EQ(out.matrix(i, j), out.matrix(j, i));
        if (record.uncorrupted[i] && record.uncorrupted[j]) {
          EXPECT_EQ(out.matrix(i, j), inst.matrix(i, j));
        }
      }
  }
}

TEST(CorruptZ2, UnknownStrategy) {
  Rng rng(4);
  const Z2Instance inst = sample_z2(10, 1.0, balanced_labels(10, rng), rng);
  EXPECT_THROW(corrupt_z2(inst, "stealth-rewire", 0.1, rng), Error);
}
