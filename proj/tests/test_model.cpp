#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ksrobust/io.hpp"
#include "ksrobust/model.hpp"
#include "ksrobust/operators.hpp"
#include "oracles.hpp"

using namespace ksrobust;

TEST(BalancedLabels, TwoVerticesGetOppositeSigns) {
  Rng rng(1);
  const LabelVector x = balanced_labels(2, rng);
  EXPECT_EQ(x[0] + x[1], 0);
}

TEST(BalancedLabels, EvenSizeSumsToZero) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const LabelVector x = balanced_labels(4, rng);
    EXPECT_EQ(x.sum(), 0);
  }
}

TEST(BalancedLabels, OddSizeHasFloorHalfPositives) {
  Rng rng(3);
  const LabelVector x = balanced_labels(5, rng);
  EXPECT_EQ(x.sum(), -1);
}

TEST(BalancedLabels, RejectsTinyN) {
  Rng rng(1);
  EXPECT_THROW(balanced_labels(1, rng), Error);
}

TEST(BalancedLabels, ConstructorRejectsImbalance) {
  EXPECT_THROW(LabelVector(SignVector{1, 1, -1, 1}), Error);
  EXPECT_THROW(LabelVector(SignVector{1, 0}), Error);
}

TEST(SbmParams, DeltaIsRecomputedExactly) {
  const SbmParams p{100, 7.5, 0.4};
  EXPECT_EQ(p.delta(), 0.4 * 0.4 * 7.5 - 1.0);
  EXPECT_NEAR((SbmParams{1000, 40, SbmParams::eps_for_delta(40, 1.0)}.delta()), 1.0, 1e-12);
}

TEST(SampleSbm, ErdosRenyiEdgeCountWithinThreeSigma) {
  const std::size_t n = 200;
  const double d = 6;
  const double pairs = n * (n - 1) / 2.0;
  const auto bin = oracle::binomial(pairs * 200, d / n);
  double total = 0;
  Rng rng(42);
  const LabelVector labels = balanced_labels(n, rng);
  for (int t = 0; t < 200; ++t) total += static_cast<double>(sample_sbm({n, d, 0.0}, labels, rng).num_edges());
  EXPECT_LE(std::abs(total - bin.mean), 3 * bin.sd);
  EXPECT_NEAR(total / 200, d * (n - 1) / 2.0, 3 * bin.sd / 200);
}

TEST(SampleSbm, IntraCommunityFrequencyMatchesBinomial) {
  const std::size_t n = 1000;
  const SbmParams p{n, 20, 0.5};
  Rng rng(7);
  const LabelVector labels = balanced_labels(n, rng);
  const Graph g = sample_sbm(p, labels, rng);
  double same = 0, diff = 0;
  for (const Edge& e : g.edges()) (labels[e.u] == labels[e.v] ? same : diff) += 1;
  const double same_pairs = 2.0 * (500.0 * 499.0 / 2.0);
  const double diff_pairs = 500.0 * 500.0;
  const auto bs = oracle::binomial(same_pairs, p.p_same());
  const auto bd = oracle::binomial(diff_pairs, p.p_diff());
  EXPECT_LE(std::abs(same - bs.mean), 3 * bs.sd);
  EXPECT_LE(std::abs(diff - bd.mean), 3 * bd.sd);
}

TEST(SampleSbm, SkipSamplerMatchesDensity) {
  const std::size_t n = 6000;
  const SbmParams p{n, 8, 0.5};
  Rng rng(9);
  const LabelVector labels = balanced_labels(n, rng);
  const Graph g = sample_sbm(p, labels, rng);
  double same = 0, diff = 0;
  for (const Edge& e : g.edges()) (labels[e.u] == labels[e.v] ? same : diff) += 1;
  const auto bs = oracle::binomial(2.0 * (3000.0 * 2999.0 / 2.0), p.p_same());
  const auto bd = oracle::binomial(3000.0 * 3000.0, p.p_diff());
  EXPECT_LE(std::abs(same - bs.mean), 3 * bs.sd);
  EXPECT_LE(std::abs(diff - bd.mean), 3 * bd.sd);
}

TEST(SampleSbm, RejectsInvalidProbability) {
  Rng rng(1);
  const LabelVector labels = balanced_labels(10, rng);
  EXPECT_THROW(sample_sbm({10, 8, 0.5}, labels, rng), Error);
  EXPECT_THROW(sample_sbm({10, 2, 0.5}, balanced_labels(12, rng), rng), Error);
}

TEST(SampleSbm, SameSeedIsBitIdentical) {
  Rng a(123), b(123);
  const LabelVector la = balanced_labels(300, a), lb = balanced_labels(300, b);
  EXPECT_EQ(la, lb);
  EXPECT_EQ(sample_sbm({300, 10, 0.3}, la, a), sample_sbm({300, 10, 0.3}, lb, b));
}

TEST(Graph, RejectsLoopsAndDuplicates) {
  EXPECT_THROW(Graph(3, {{0, 0}}), Error);
  EXPECT_THROW(Graph(3, {{0, 1}, {1, 0}}), Error);
  EXPECT_THROW(Graph(3, {{0, 3}}), Error);
}

TEST(Graph, DegreesMatchEdgeSet) {
  Rng rng(5);
  const Graph g = sample_sbm({200, 10, 0.2}, balanced_labels(200, rng), rng);
  std::vector<std::size_t> deg(200, 0);
  for (const Edge& e : g.edges()) {
    ++deg[e.u];
    ++deg[e.v];
    EXPECT_LT(e.u, e.v);
  }
  for (Vertex v = 0; v < 200; ++v) EXPECT_EQ(g.degree(v), deg[v]);
}

TEST(CenterAdjacency, EmptyGraphWithFullDegree) {
  const std::size_t n = 5;
  const CenteredMatrix m = center_adjacency(Graph(n, {}), static_cast<double>(n));
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(m.entry(i, j), -1.0);
}

TEST(CenterAdjacency, SingleEdge) {
  const CenteredMatrix m = center_adjacency(Graph(2, {{0, 1}}), 1.0);
  EXPECT_DOUBLE_EQ(m.entry(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(m.entry(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(m.diagonal(1), -0.5);
}

TEST(CenterAdjacency, MatvecAgreesWithDenseOnRandomProbes) {
  Rng rng(11);
  const std::size_t n = 150;
  const Graph g = sample_sbm({n, 12, 0.3}, balanced_labels(n, rng), rng);
  const CenteredMatrix m = center_adjacency(g, 12);
  DenseMatrix dense = DenseMatrix::Constant(n, n, -12.0 / n);
  for (const Edge& e : g.edges()) {
    dense(e.u, e.v) += 1;
    dense(e.v, e.u) += 1;
  }
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  for (int probe = 0; probe < 20; ++probe) {
    Matrix x(n, 1), y;
    for (Index i = 0; i < static_cast<Index>(n); ++i) x(i, 0) = normal(gen);
    m.apply(x, y);
    const Vector expected = dense * x.col(0);
    EXPECT_LE((y.col(0) - expected).norm(), 1e-10 * expected.norm());
  }
}

TEST(CenterAdjacency, RestrictionMatchesDenseSubmatrix) {
  Rng rng(12);
  const Graph g = sample_sbm({60, 8, 0.3}, balanced_labels(60, rng), rng);
  const CenteredMatrix m = center_adjacency(g, 8);
  const std::vector<Vertex> keep{3, 7, 8, 20, 41, 59};
  const DenseMatrix sub = to_dense(m.restrict(keep));
  for (std::size_t a = 0; a < keep.size(); ++a)
    for (std::size_t b = 0; b < keep.size(); ++b) EXPECT_DOUBLE_EQ(sub(a, b), m.entry(keep[a], keep[b]));
}

TEST(SampleZ2, ExactSymmetryAndNoiseVariance) {
  const std::size_t n = 300;
  Rng rng(21);
  const LabelVector labels = balanced_labels(n, rng);
  const Z2Instance inst = sample_z2(n, 0.0, labels, rng);
  double ss = 0, count = 0;
  for (Index i = 0; i < static_cast<Index>(n); ++i)
    for (Index j = 0; j < static_cast<Index>(n); ++j) {
      EXPECT_EQ(inst.matrix(i, j), inst.matrix(j, i));
      if (i < j) {
        ss += inst.matrix(i, j) * inst.matrix(i, j);
        count += 1;
      }
    }
  EXPECT_NEAR(ss / count / n, 1.0, 0.05);
}

TEST(SampleZ2, StrongSpikeTopEigenvectorAlignsWithLabels) {
  const std::size_t n = 200;
  Rng rng(22);
  const LabelVector labels = balanced_labels(n, rng);
  const Z2Instance inst = sample_z2(n, 10.0, labels, rng);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(inst.matrix);
  const Vector v = eig.eigenvectors().col(n - 1);
  const double corr = v.dot(labels.as_vector());
  EXPECT_GE(corr * corr / n, 0.9);
}

TEST(SampleZ2, RejectsLabelLengthMismatch) {
  Rng rng(1);
  EXPECT_THROW(sample_z2(10, 1.0, balanced_labels(8, rng), rng), Error);
}

TEST(Io, EdgeListRoundTrip) {
  Rng rng(2);
  const Graph g = sample_sbm({80, 6, 0.2}, balanced_labels(80, rng), rng);
  std::stringstream ss;
  write_edge_list(ss, g);
  EXPECT_EQ(read_edge_list(ss), g);
}

TEST(Io, LabelsAndMatrixRoundTrip) {
  Rng rng(3);
  const LabelVector labels = balanced_labels(9, rng);
  std::stringstream ls;
  write_labels(ls, labels.entries());
  EXPECT_EQ(read_labels(ls), labels.entries());

  const Z2Instance inst = sample_z2(9, 1.0, labels, rng);
  std::stringstream ms(std::ios::in | std::ios::out | std::ios::binary);
  write_matrix(ms, inst.matrix);
  const std::string bytes = ms.str();
  ASSERT_EQ(bytes.size(), 8u + 81u * 8u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 9);
  EXPECT_EQ(read_matrix(ms), inst.matrix);
}

TEST(Io, TruncatedInputIsAnIoError) {
  std::stringstream ss("4 3\n0 1\n1 2\n");
  try {
    read_edge_list(ss);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}
