#include <gtest/gtest.h>

#include <cmath>

#include "ksrobust/adversary.hpp"
#include "ksrobust/model.hpp"
#include "ksrobust/recover_dense.hpp"
#include "lemma_checks.hpp"

using namespace ksrobust;

namespace {

constexpr std::size_t kN = 400;
constexpr double kD = 20;
const double kEps = SbmParams::eps_for_delta(kD, 1.0);

DenseProgramParams fast_params(double mu) {
  DenseProgramParams p;
  p.mu = mu;
  p.solver.restarts = 2;
  p.solver.seed = 17;
  return p;
}

}  // namespace

TEST(DenseParams, Validation) {
  DenseProgramParams p;
  p.mu = 0.6;
  p.beta = 0.4;
  EXPECT_THROW(p.validate(), Error);
  p.mu = 0.1;
  p.Delta = 0;
  EXPECT_THROW(p.validate(), Error);
  p.Delta = 0.1;
  p.C_s = -1;
  EXPECT_THROW(p.validate(), Error);
}

TEST(DenseParams, SupportSizeRoundsDown) {
  DenseProgramParams p;
  p.mu = 0.013;
  p.beta = 0.02;
  EXPECT_EQ(p.support_size(1000), 967u);
  EXPECT_EQ(p.support_size(333), 322u);
}

TEST(CheckFeasibility, IdentityFactorIsInfeasible) {
  Rng rng(1);
  const CenteredMatrix atil = center_adjacency(sample_sbm({kN, kD, kEps}, balanced_labels(kN, rng), rng), kD);
  DenseProgramParams params = fast_params(0.0);
  ProgramPoint point;
  point.factor = Matrix::Identity(kN, kN);
  point.w.assign(kN, 0);
  for (Vertex v = 0; v < params.support_size(kN); ++v) {
    point.support.push_back(v);
    point.w[v] = 1;
  }
  const FeasibilityReport r = check_feasibility(atil, point, params);
  EXPECT_NEAR(r.objective, -kD / kN * static_cast<double>(point.support.size()), 1e-9);
  EXPECT_FALSE(r.feasible);
  EXPECT_LT(r.objective_slack(), 0);
}

TEST(CheckFeasibility, FloodedCliqueViolatesSpectralCap) {
  const std::size_t n = kN, flood = 40;
  Rng rng(2);
  const Graph base = sample_sbm({n, kD, kEps}, balanced_labels(n, rng), rng);
  std::vector<Edge> edges(base.edges().begin(), base.edges().end());
  for (Vertex u = 0; u < flood; ++u)
    for (Vertex v = u + 1; v < flood; ++v)
      if (!base.has_edge(u, v)) edges.push_back({u, v});
  const CenteredMatrix atil = center_adjacency(Graph(n, edges), kD);
  ProgramPoint point;
  point.factor = Matrix::Zero(n, 1);
  point.factor.col(0).setOnes();
  point.w.assign(n, 0);
  for (Vertex v = 0; v < flood; ++v) {
    point.support.push_back(v);
    point.w[v] = 1;
  }
  const FeasibilityReport r = check_feasibility(atil, point, fast_params(0.0));
  EXPECT_GT(r.spectral, 3 * std::sqrt(kD));
  EXPECT_FALSE(r.feasible);
}

TEST(CertifiedBound, ReducesToPlugInWithoutCorruption) {
  DenseProgramParams p;
  p.mu = 0;
  p.beta = 0;
  p.Delta = 0.1;
  p.rho = 0.02;
  const double expected = 0.08 * 1000.0 * 1000.0 / (0.3 * std::sqrt(40.0));
  EXPECT_NEAR(certified_correlation_bound(p, 1000, 40, 0.3), expected, 1e-9 * expected);
}

TEST(CertifiedBound, ArithmeticReDerivation) {
  DenseProgramParams p;
  p.mu = 0.005;
  p.beta = 0.01;
  p.Delta = 0.1;
  p.rho = 0.02;
  p.C_s = 3;
  const double n = 1000, d = 40, eps = 0.2236;
  // Push-out margin on the uncorrupted part, minus the corrupted block, minus
  // the entries outside S'.
  const double margin = 0.08 * (1 - 0.01 - 0.01);
  const double corrupted_block = 6 * 0.005;
  const double outside = 2 * (0.01 + 0.01) * n * n;
  const double expected = (margin - corrupted_block) * n * n / (eps * std::sqrt(d)) - outside;
  const double got = certified_correlation_bound(p, 1000, d, eps);
  EXPECT_NEAR(got, expected, 1e-9 * std::abs(expected));
  // The 2 (2 mu + beta) n^2 term outweighs the margin at these constants.
  EXPECT_NEAR(got, -5774.99, 0.01);
}

TEST(CertifiedBound, NonpositiveForLargeBudget) {
  DenseProgramParams p;
  p.mu = 0.2;
  EXPECT_LE(certified_correlation_bound(p, 1000, 40, 0.2236), 0);
}

TEST(SolveProgram, PointIsWellFormed) {
  Rng rng(3);
  const CenteredMatrix atil = center_adjacency(sample_sbm({kN, kD, kEps}, balanced_labels(kN, rng), rng), kD);
  const DenseProgramParams params = fast_params(0.02);
  const ProgramPoint p = solve_program(atil, params, kEps);
  EXPECT_EQ(p.support.size(), params.support_size(kN));
  EXPECT_TRUE(std::is_sorted(p.support.begin(), p.support.end()));
  std::size_t ones = 0;
  for (auto w : p.w) {
    EXPECT_TRUE(w == 0 || w == 1);
    ones += w;
  }
  EXPECT_EQ(ones, p.support.size());
  for (Index i = 0; i < p.factor.rows(); ++i) EXPECT_NEAR(p.factor.row(i).norm(), 1.0, 1e-9);
  EXPECT_NEAR(support_objective(atil, p), p.objective, 1e-6 * std::abs(p.objective));
  EXPECT_LE(p.spectral, params.spectral_threshold(kD) * (1 + kSpectralTolerance));
}

TEST(SolveProgram, IsDeterministic) {
  Rng rng(4);
  const CenteredMatrix atil = center_adjacency(sample_sbm({300, kD, kEps}, balanced_labels(300, rng), rng), kD);
  const ProgramPoint a = solve_program(atil, fast_params(0.02), kEps);
  const ProgramPoint b = solve_program(atil, fast_params(0.02), kEps);
  EXPECT_EQ(a.support, b.support);
  EXPECT_EQ(a.factor, b.factor);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(SolveProgram, ExcludesDegreeFloodedVertices) {
  std::size_t corrupted = 0, excluded = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(derive_seed(5, seed));
    const LabelVector labels = balanced_labels(kN, rng);
    const Graph g = sample_sbm({kN, kD, kEps}, labels, rng);
    auto [attacked, record] = corrupt_nodes(g, labels, "degree-flood", 0.05, rng);
    const ProgramPoint p = solve_program(center_adjacency(attacked, kD), fast_params(0.05), kEps);
    for (Vertex v : record.corrupted) excluded += p.w[v] == 0;
    corrupted += record.corrupted.size();
  }
  EXPECT_GE(static_cast<double>(excluded), 0.9 * static_cast<double>(corrupted));
}

TEST(SolveProgram, TransferInequalityAndEntryBound) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(derive_seed(6, seed));
    const LabelVector labels = balanced_labels(kN, rng);
    const Graph g = sample_sbm({kN, kD, kEps}, labels, rng);
    auto [attacked, record] = corrupt_nodes(g, labels, "stealth-rewire", 0.02, rng);
    const CenteredMatrix atil = center_adjacency(attacked, kD);
    const DenseProgramParams params = fast_params(0.02);
    const ProgramPoint p = solve_program(atil, params, kEps);
    const lemma::TransferOutcome t = lemma::check_transfer(atil, p, params.mu, params.beta, params.C_s, 20, rng);
    EXPECT_TRUE(t.holds()) << "margin " << t.worst_margin << " entry " << t.max_abs_entry;
    const lemma::CorrelationOutcome c =
        lemma::check_correlation(atil, p, labels, record.uncorrupted, params.mu, kEps, params.C_s, params.solver);
    EXPECT_TRUE(c.holds()) << c.lhs << " < " << c.rhs;
  }
}

TEST(RecoverDense, AboveThresholdBeatsChance) {
  double total = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(derive_seed(7, seed));
    const LabelVector labels = balanced_labels(kN, rng);
    const Graph g = sample_sbm({kN, kD, 0.5}, labels, rng);
    const Estimate e = recover_dense(g, fast_params(0.0), kD, 0.5, rng, &labels);
    ASSERT_TRUE(e.overlap_sq_frac.has_value());
    ASSERT_TRUE(e.feasibility.has_value());
    EXPECT_EQ(e.low_confidence, !e.feasibility->feasible);
    total += *e.overlap_sq_frac;
  }
  EXPECT_GE(total / 3, 0.1);
}

TEST(RecoverDense, NoSignalStaysAtChance) {
  double total = 0;
  const int seeds = 4;
  for (int seed = 0; seed < seeds; ++seed) {
    Rng rng(derive_seed(8, seed));
    const LabelVector labels = balanced_labels(kN, rng);
    const Graph g = sample_sbm({kN, kD, 0.0}, labels, rng);
    total += *recover_dense(g, fast_params(0.0), kD, 1e-3, rng, &labels).overlap_sq_frac;
  }
  // Each trial has mean about 1/n with standard deviation about sqrt(2)/n.
  EXPECT_LE(total / seeds, 5.0 / kN);
}

TEST(RecoverBasicSdp, ReturnsValidLabels) {
  Rng rng(9);
  const LabelVector labels = balanced_labels(200, rng);
  const Graph g = sample_sbm({200, kD, 0.6}, labels, rng);
  const Estimate e = recover_basic_sdp(g, kD, SolverOptions{}, 10, rng, &labels);
  EXPECT_EQ(e.labels.size(), 200u);
  for (auto s : e.labels) EXPECT_TRUE(s == 1 || s == -1);
  EXPECT_GE(*e.overlap_sq_frac, 0.1);
}
