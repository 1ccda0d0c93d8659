#pragma once

// Experiment orchestration. A trial is a pure function of (config, trial
// index): its seed is derive_seed(config.seed, index), and every random
// stream inside the trial descends from it. Trials run on a small worker
// pool and land in their own slot, so the report does not depend on the
// schedule.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ksrobust/adversary.hpp"
#include "ksrobust/calibration.hpp"
#include "ksrobust/error.hpp"
#include "ksrobust/model.hpp"
#include "ksrobust/recover_dense.hpp"
#include "ksrobust/recover_sparse.hpp"
#include "ksrobust/rng.hpp"
#include "ksrobust/rounding.hpp"
#include "ksrobust/sdp.hpp"
#include "ksrobust/z2.hpp"

namespace ksrobust {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kSweepCsvVersion = 1;

enum class ModelKind { kSbm, kZ2 };
enum class Algorithm { kDense, kSparse, kBaseline };

inline std::string to_string(ModelKind m) { return m == ModelKind::kSbm ? "sbm" : "z2"; }

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kDense:
      return "dense";
    case Algorithm::kSparse:
      return "sparse";
    case Algorithm::kBaseline:
      return "basic-sdp-baseline";
  }
  return "unknown";
}

inline ModelKind parse_model(const std::string& s) {
  if (s == "sbm") return ModelKind::kSbm;
  if (s == "z2") return ModelKind::kZ2;
  throw Error(ErrorCode::kInvalidParameter, "unknown model '" + s + "'");
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "dense") return Algorithm::kDense;
  if (s == "sparse") return Algorithm::kSparse;
  if (s == "basic-sdp-baseline" || s == "baseline") return Algorithm::kBaseline;
  throw Error(ErrorCode::kInvalidParameter, "unknown algorithm '" + s + "'");
}

struct ExperimentConfig {
  ModelKind model = ModelKind::kSbm;
  std::size_t n = 1000;
  double d = 40;
  double eps = 0.2236;
  double sigma = 1.5;
  double mu = 0;
  std::string adversary = "none";  // a node/Z2 strategy tag, "erasure", or "none"
  Algorithm algorithm = Algorithm::kDense;
  int trials = 10;
  std::uint64_t seed = 1;
  int workers = 1;
  double trial_timeout_s = 0;  // 0 disables the guard
  double beta = kDefaultBeta;
  int restarts = 5;
  // Overrides of calibrated program constants.
  std::optional<double> Delta;
  std::optional<double> null_level;

  double delta() const { return eps * eps * d - 1.0; }

  void validate() const {
    require(trials >= 1, "trials must be at least 1");
    require(workers >= 1, "workers must be at least 1");
    require(mu >= 0 && mu < 1, "mu must lie in [0, 1)");
    require(restarts >= 1, "restarts must be at least 1");
    if (model == ModelKind::kSbm) {
      SbmParams{n, d, eps}.validate();
      require(algorithm != Algorithm::kDense || mu + beta < 1, "mu + beta must be below 1");
      if (adversary != "none" && adversary != "erasure") parse_node_strategy(adversary);
    } else {
      require(n >= 2 && n <= 2000, "Z2 experiments support 2 <= n <= 2000");
      require(sigma >= 0, "sigma must be nonnegative");
      require(algorithm != Algorithm::kSparse, "the sparse pipeline applies to block models only");
      if (adversary != "none") parse_z2_strategy(adversary);
    }
  }
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json{{"model", to_string(c.model)}, {"n", c.n}, {"mu", c.mu}, {"adversary", c.adversary},
                     {"algorithm", to_string(c.algorithm)}, {"trials", c.trials}, {"seed", c.seed},
                     {"restarts", c.restarts}};
  if (c.model == ModelKind::kSbm) {
    j["d"] = c.d;
    j["eps"] = c.eps;
    j["delta"] = c.delta();
    j["beta"] = c.beta;
  } else {
    j["sigma"] = c.sigma;
  }
  if (c.Delta) j["Delta"] = *c.Delta;
  if (c.null_level) j["null_level"] = *c.null_level;
}

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok, timeout, error: ...
  double overlap_sq_frac = std::numeric_limits<double>::quiet_NaN();
  std::optional<bool> feasible;
  std::optional<double> objective;  // program objective <M_S, X>
  std::optional<double> spectral;
  double score = std::numeric_limits<double>::quiet_NaN();  // x^T M x of the estimate
  bool low_confidence = false;
  std::optional<int> prune_rounds;
  std::optional<std::size_t> max_degree_after;
  std::size_t corrupted = 0;
  std::size_t corrupted_excluded = 0;  // corrupted vertices outside the program support
  double runtime_s = 0;

  // Program point diagnostics kept in memory only.
  std::optional<ProgramPoint> point;
};

inline void to_json(nlohmann::json& j, const TrialRecord& r) {
  j = nlohmann::json{{"trial", r.trial}, {"seed", r.seed}, {"status", r.status},
                     {"overlap_sq_frac", r.overlap_sq_frac}, {"score", r.score},
                     {"low_confidence", r.low_confidence}, {"corrupted", r.corrupted}};
  if (r.feasible) j["feasible"] = *r.feasible;
  if (r.objective) j["objective"] = *r.objective;
  if (r.spectral) j["spectral"] = *r.spectral;
  if (r.prune_rounds) j["prune_rounds"] = *r.prune_rounds;
  if (r.max_degree_after) j["max_degree_after"] = *r.max_degree_after;
  if (r.point) j["corrupted_excluded"] = r.corrupted_excluded;
}

struct Aggregates {
  std::size_t count = 0;  // trials with a finite overlap
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
  double min = std::numeric_limits<double>::quiet_NaN();
  double q25 = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double q75 = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  double feasible_rate = std::numeric_limits<double>::quiet_NaN();
  double mean_runtime_s = 0;
};

struct Report {
  ExperimentConfig config;
  std::string calibration;  // "table", "override", "default"
  std::vector<TrialRecord> records;
  Aggregates aggregates;
};

/// Linear-interpolation quantile of a sorted sample.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline Aggregates aggregate(const std::vector<TrialRecord>& records) {
  Aggregates a;
  std::vector<double> xs;
  int feasible_known = 0, feasible_true = 0;
  double runtime = 0;
  for (const auto& r : records) {
    if (std::isfinite(r.overlap_sq_frac)) xs.push_back(r.overlap_sq_frac);
    if (r.feasible) {
      ++feasible_known;
      feasible_true += *r.feasible;
    }
    runtime += r.runtime_s;
  }
  a.mean_runtime_s = records.empty() ? 0.0 : runtime / static_cast<double>(records.size());
  if (feasible_known > 0) a.feasible_rate = static_cast<double>(feasible_true) / feasible_known;
  a.count = xs.size();
  if (xs.empty()) return a;
  double sum = 0;
  for (double x : xs) sum += x;
  a.mean = sum / static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - a.mean) * (x - a.mean);
  a.std = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  std::sort(xs.begin(), xs.end());
  a.min = xs.front();
  a.max = xs.back();
  a.q25 = sorted_quantile(xs, 0.25);
  a.median = sorted_quantile(xs, 0.5);
  a.q75 = sorted_quantile(xs, 0.75);
  return a;
}

/// Deterministic report. Runtimes vary between runs and only appear when
/// `include_timing` is set.
inline nlohmann::json report_to_json(const Report& report, bool include_timing = false) {
  const Aggregates& a = report.aggregates;
  nlohmann::json j{{"schema_version", kReportSchemaVersion},
                   {"config", report.config},
                   {"calibration", report.calibration},
                   {"records", report.records},
                   {"aggregates",
                    {{"count", a.count},
                     {"mean", a.mean},
                     {"std", a.std},
                     {"min", a.min},
                     {"q25", a.q25},
                     {"median", a.median},
                     {"q75", a.q75},
                     {"max", a.max},
                     {"feasible_rate", a.feasible_rate}}}};
  if (include_timing) {
    nlohmann::json per_trial = nlohmann::json::array();
    for (const auto& r : report.records) per_trial.push_back(r.runtime_s);
    j["timing"] = {{"runtime_s", per_trial}, {"mean_runtime_s", a.mean_runtime_s}};
  }
  return j;
}

/// KSROBUST_WORKERS when set and positive, otherwise `fallback`.
inline int resolve_workers(int fallback) {
  if (const char* env = std::getenv("KSROBUST_WORKERS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<int>(value);
  }
  return std::max(1, fallback);
}

/// Dense-program constants for a config: overrides first, then the
/// calibration table, then the uncalibrated defaults.
inline std::pair<DenseProgramParams, std::string> resolve_dense_params(const ExperimentConfig& c,
                                                                       const SolverOptions& solver) {
  DenseProgramParams p;
  std::string source = "default";
  const auto entry = lookup_dense_calibration(c.n, c.d, c.delta(), c.mu, c.beta);
  if (entry) {
    p = dense_params(*entry, solver);
    source = "table";
  }
  p.mu = c.mu;
  p.beta = c.beta;
  p.solver = solver;
  if (c.Delta || c.null_level) source = "override";
  if (c.Delta) p.Delta = *c.Delta;
  if (c.null_level) p.null_level = *c.null_level;
  return {p, source};
}

inline std::pair<Z2ProgramParams, std::string> resolve_z2_params(const ExperimentConfig& c,
                                                                 const SolverOptions& solver) {
  Z2ProgramParams p;
  std::string source = "default";
  if (const auto entry = lookup_z2_calibration(c.n, c.sigma, c.mu)) {
    p = z2_params(*entry, c.sigma, solver);
    source = "table";
  }
  p.mu = c.mu;
  // A sigma of zero is a valid instance but not a valid program target.
  p.sigma = c.sigma > 0 ? c.sigma : 1.0;
  p.solver = solver;
  if (c.Delta || c.null_level) source = "override";
  if (c.Delta) p.Delta_sigma = *c.Delta;
  if (c.null_level) p.null_level = *c.null_level;
  return {p, source};
}

namespace detail {

inline void note_estimate(TrialRecord& rec, const Estimate& est) {
  rec.overlap_sq_frac = est.overlap_sq_frac.value_or(std::numeric_limits<double>::quiet_NaN());
  rec.score = est.objective;
  rec.low_confidence = est.low_confidence;
  if (est.feasibility) {
    rec.feasible = est.feasibility->feasible;
    rec.objective = est.feasibility->objective;
    rec.spectral = est.feasibility->spectral;
  }
}

inline void note_exclusion(TrialRecord& rec, const CorruptionRecord& corruption, const ProgramPoint& point) {
  rec.corrupted = corruption.corrupted.size();
  rec.corrupted_excluded = 0;
  for (Vertex v : corruption.corrupted) rec.corrupted_excluded += point.w[v] == 0;
}

}  // namespace detail

/// The observed graph of one block-model trial, with the ground truth the
/// trial is scored against.
struct SbmTrialInstance {
  Graph graph;
  LabelVector truth;            // labels of the vertices of `graph`
  double d = 0;                 // density parameter the algorithms receive
  CorruptionRecord corruption;  // empty for "none" and "erasure"
};

/// Draws labels, graph, and corruption from `rng` in the order every trial
/// uses, so a trial's instance can be rebuilt from its seed alone.
inline SbmTrialInstance sample_sbm_trial(const ExperimentConfig& c, Rng& rng) {
  const LabelVector labels = balanced_labels(c.n, rng);
  SbmTrialInstance inst{sample_sbm({c.n, c.d, c.eps}, labels, rng), labels, c.d, {}};
  if (c.adversary == "erasure") {
    ErasureResult erased = erasure_adversary(inst.graph, c.mu, rng);
    inst.truth = labels.subset(erased.index_map);
    // The surviving graph keeps the edge density d / n.
    inst.d = c.d * static_cast<double>(erased.graph.n()) / static_cast<double>(c.n);
    inst.graph = std::move(erased.graph);
  } else if (c.adversary != "none") {
    auto corrupted = corrupt_nodes(inst.graph, labels, c.adversary, c.mu, rng);
    inst.graph = std::move(corrupted.first);
    inst.corruption = std::move(corrupted.second);
  }
  return inst;
}

namespace detail {

inline void run_sbm_trial(const ExperimentConfig& c, TrialRecord& rec, Rng& rng, const SolverOptions& solver,
                          bool keep_point) {
  SbmTrialInstance inst = sample_sbm_trial(c, rng);
  const Graph& graph = inst.graph;
  const LabelVector& truth = inst.truth;
  const double d = inst.d;
  const CorruptionRecord& corruption = inst.corruption;
  rec.corrupted = corruption.corrupted.size();

  switch (c.algorithm) {
    case Algorithm::kDense: {
      DenseProgramParams params = resolve_dense_params(c, solver).first;
      // The erasure model removes vertices instead of corrupting them; the
      // program sees a clean graph of the surviving size.
      if (c.adversary == "erasure") params.mu = 0;
      DenseRecovery r = recover_dense_detailed(graph, params, d, c.eps, rng, &truth);
      note_estimate(rec, r.estimate);
      if (!corruption.corrupted.empty()) note_exclusion(rec, corruption, r.point);
      if (keep_point) rec.point = std::move(r.point);
      break;
    }
    case Algorithm::kSparse: {
      SparseParams params = SparseParams::defaults(d, c.mu, graph.n());
      params.solver = solver;
      SparseRecovery r = recover_sparse_detailed(graph, params, d, c.eps, rng, &truth);
      note_estimate(rec, r.estimate);
      rec.prune_rounds = r.pruned.log.rounds;
      rec.max_degree_after = r.pruned.graph.max_degree();
      break;
    }
    case Algorithm::kBaseline: {
      note_estimate(rec, recover_basic_sdp(graph, d, solver, kDefaultRoundingTrials, rng, &truth));
      break;
    }
  }
}

inline void run_z2_trial(const ExperimentConfig& c, TrialRecord& rec, Rng& rng, const SolverOptions& solver,
                         bool keep_point) {
  const LabelVector labels = balanced_labels(c.n, rng);
  Z2Instance inst = sample_z2(c.n, c.sigma, labels, rng);
  CorruptionRecord corruption;
  if (c.adversary != "none") {
    auto corrupted = corrupt_z2(inst, c.adversary, c.mu, rng);
    inst = std::move(corrupted.first);
    corruption = std::move(corrupted.second);
  }
  rec.corrupted = corruption.corrupted.size();
  if (c.algorithm == Algorithm::kBaseline) {
    SolverOptions quiet = solver;
    quiet.certify = false;
    const DenseSymmetric a(inst.matrix);
    const SdpSolution sol = solve_basic_sdp(a, quiet);
    Estimate est = select_estimate(gaussian_sign_rounding(sol.factor, kDefaultRoundingTrials, rng), a);
    est.overlap_sq_frac = evaluate_overlap(est.labels, labels);
    note_estimate(rec, est);
    return;
  }
  Z2Recovery r = recover_z2_detailed(inst.matrix, resolve_z2_params(c, solver).first, rng, &labels);
  note_estimate(rec, r.estimate);
  if (!corruption.corrupted.empty()) note_exclusion(rec, corruption, r.point);
  if (keep_point) rec.point = std::move(r.point);
}

}  // namespace detail

/// One trial; failures are captured in the record, never thrown.
inline TrialRecord run_trial(const ExperimentConfig& config, int trial, bool keep_point = false) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial));
  const auto start = Clock::now();
  try {
    Rng rng(rec.seed);
    SolverOptions solver;
    solver.seed = derive_seed(rec.seed, 1);
    solver.restarts = config.restarts;
    if (config.trial_timeout_s > 0)
      solver.deadline = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(config.trial_timeout_s));
    if (config.model == ModelKind::kSbm) {
      detail::run_sbm_trial(config, rec, rng, solver, keep_point);
    } else {
      detail::run_z2_trial(config, rec, rng, solver, keep_point);
    }
  } catch (const Error& e) {
    rec.status = e.code() == ErrorCode::kTimeout ? "timeout" : std::string("error: ") + e.what();
    rec.overlap_sq_frac = std::numeric_limits<double>::quiet_NaN();
  } catch (const std::exception& e) {
    rec.status = std::string("error: ") + e.what();
    rec.overlap_sq_frac = std::numeric_limits<double>::quiet_NaN();
  }
  rec.runtime_s = std::chrono::duration<double>(Clock::now() - start).count();
  return rec;
}

/// Runs every trial on `config.workers` threads and aggregates.
inline Report run_experiment(const ExperimentConfig& config, bool keep_points = false) {
  config.validate();
  Report report;
  report.config = config;
  report.calibration = config.model == ModelKind::kSbm
                           ? resolve_dense_params(config, SolverOptions{}).second
                           : resolve_z2_params(config, SolverOptions{}).second;
  if (config.algorithm != Algorithm::kDense) report.calibration = "unused";
  report.records.resize(static_cast<std::size_t>(config.trials));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < config.trials; t = next++)
      report.records[static_cast<std::size_t>(t)] = run_trial(config, t, keep_points);
  };
  const int workers = std::min(config.workers, config.trials);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  report.aggregates = aggregate(report.records);
  return report;
}

/// Parameter overrides for one grid point. Recognized keys: n, d, eps,
/// delta (sets eps from d), sigma, mu, trials.
using SweepPoint = std::vector<std::pair<std::string, double>>;

inline ExperimentConfig apply_sweep_point(ExperimentConfig c, const SweepPoint& point) {
  for (const auto& [key, value] : point) {
    if (key == "n") {
      c.n = static_cast<std::size_t>(value);
    } else if (key == "d") {
      c.d = value;
    } else if (key == "eps") {
      c.eps = value;
    } else if (key == "delta") {
      require(value > -1, "delta must exceed -1");
    } else if (key == "sigma") {
      c.sigma = value;
    } else if (key == "mu") {
      c.mu = value;
    } else if (key == "trials") {
      c.trials = static_cast<int>(value);
    } else {
      throw Error(ErrorCode::kInvalidParameter, "unknown sweep parameter '" + key + "'");
    }
  }
  // delta depends on d, so it is applied after every other key.
  for (const auto& [key, value] : point)
    if (key == "delta") c.eps = SbmParams::eps_for_delta(c.d, value);
  return c;
}

struct SweepResult {
  std::string csv;
  std::vector<Report> reports;
};

/// One CSV row per grid point, in grid order. Columns: the swept parameter
/// names in order of first appearance, then mean_overlap, std,
/// feasible_rate, mean_runtime_s. Trials that fail leave NaN cells and are
/// counted in a trailing comment line.
inline SweepResult phase_sweep(const ExperimentConfig& base, const std::vector<SweepPoint>& grid) {
  require(!grid.empty(), "phase_sweep needs a nonempty grid");
  std::vector<std::string> columns;
  for (const auto& point : grid)
    for (const auto& kv : point)
      if (std::find(columns.begin(), columns.end(), kv.first) == columns.end()) columns.push_back(kv.first);

  SweepResult out;
  std::ostringstream csv;
  csv.precision(10);
  for (const auto& col : columns) csv << col << ',';
  csv << "mean_overlap,std,feasible_rate,mean_runtime_s\n";
  int failed_trials = 0;
  for (const auto& point : grid) {
    const Report report = run_experiment(apply_sweep_point(base, point));
    for (const auto& col : columns) {
      auto it = std::find_if(point.begin(), point.end(), [&](const auto& kv) { return kv.first == col; });
      if (it != point.end()) {
        csv << it->second;
      } else {
        csv << "NaN";
      }
      csv << ',';
    }
    const Aggregates& a = report.aggregates;
    auto cell = [&](double v) {
      if (std::isfinite(v)) {
        csv << v;
      } else {
        csv << "NaN";
      }
    };
    cell(a.mean);
    csv << ',';
    cell(a.std);
    csv << ',';
    cell(a.feasible_rate);
    csv << ',';
    cell(a.mean_runtime_s);
    csv << '\n';
    for (const auto& r : report.records) failed_trials += r.status != "ok";
    out.reports.push_back(report);
  }
  if (failed_trials > 0) csv << "# " << failed_trials << " trial(s) failed; their cells are NaN or excluded\n";
  out.csv = csv.str();
  return out;
}

}  // namespace ksrobust
