#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ksrobust/adversary.hpp"
#include "ksrobust/calibration.hpp"
#include "ksrobust/harness.hpp"
#include "ksrobust/io.hpp"
#include "ksrobust/model.hpp"
#include "ksrobust/recover_dense.hpp"
#include "ksrobust/recover_sparse.hpp"
#include "ksrobust/sdp.hpp"
#include "ksrobust/spectral.hpp"
#include "ksrobust/z2.hpp"

using namespace ksrobust;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out;
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  write_file(g.out, [&](std::ostream& os) { os << text << (text.empty() || text.back() == '\n' ? "" : "\n"); });
}

void emit_json(const Globals& g, const json& j) { emit(g, j.dump(2)); }

int workers_of(const Globals& g) {
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return resolve_workers(g.workers > 0 ? g.workers : hw);
}

// Either eps directly or delta with eps derived from d.
double resolve_eps(double d, const std::optional<double>& eps, const std::optional<double>& delta) {
  if (eps) return *eps;
  if (delta) return SbmParams::eps_for_delta(d, *delta);
  return SbmParams::eps_for_delta(d, 1.0);
}

// Edge-list or binary matrix input with a format guess from the extension.
bool looks_like_matrix(const std::string& path, const std::string& format) {
  if (format == "matrix") return true;
  if (format == "edgelist") return false;
  return path.size() > 4 && path.substr(path.size() - 4) == ".bin";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust community detection and Z2 synchronization via submatrix SDPs"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads (KSROBUST_WORKERS overrides)");
  app.add_option("--out", g.out, "Output path; stdout when omitted");

  // gen -----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Sample a block-model graph or a Z2 matrix");
  std::string gen_model = "sbm", gen_labels_out;
  std::size_t gen_n = 1000;
  double gen_d = 40, gen_sigma = 1.5;
  std::optional<double> gen_eps, gen_delta;
  gen->add_option("--model", gen_model, "sbm or z2")->check(CLI::IsMember({"sbm", "z2"}));
  gen->add_option("--n", gen_n, "Vertex count")->capture_default_str();
  gen->add_option("--d", gen_d, "Average degree")->capture_default_str();
  gen->add_option("--eps", gen_eps, "Bias parameter");
  gen->add_option("--delta", gen_delta, "Distance eps^2 d - 1 to the threshold (sets eps)");
  gen->add_option("--sigma", gen_sigma, "Z2 signal strength")->capture_default_str();
  gen->add_option("--labels-out", gen_labels_out, "Where to write the hidden labels");
  gen->callback([&] {
    Rng rng(g.seed);
    const LabelVector labels = balanced_labels(gen_n, rng);
    if (gen_model == "sbm") {
      const Graph graph = sample_sbm({gen_n, gen_d, resolve_eps(gen_d, gen_eps, gen_delta)}, labels, rng);
      std::ostringstream os;
      write_edge_list(os, graph);
      emit(g, os.str());
    } else {
      require(!g.out.empty(), "gen --model z2 writes binary data and needs --out");
      const Z2Instance inst = sample_z2(gen_n, gen_sigma, labels, rng);
      write_file(g.out, [&](std::ostream& os) { write_matrix(os, inst.matrix); }, std::ios::binary);
    }
    if (!gen_labels_out.empty())
      write_file(gen_labels_out, [&](std::ostream& os) { write_labels(os, labels.entries()); });
  });

  // corrupt -------------------------------------------------------------
  auto* corrupt = app.add_subcommand("corrupt", "Apply an adversary to a graph or Z2 matrix");
  std::string cor_input, cor_labels, cor_adversary = "stealth-rewire", cor_record_out, cor_format = "auto",
                                     cor_map_out;
  double cor_mu = 0.05, cor_sigma = 1.5;
  corrupt->add_option("--input", cor_input, "Edge list or binary matrix")->required();
  corrupt->add_option("--format", cor_format, "edgelist, matrix or auto")->capture_default_str();
  corrupt->add_option("--labels", cor_labels, "Hidden labels (required by every strategy but erasure)");
  corrupt->add_option("--adversary", cor_adversary,
                      "stealth-rewire, degree-flood, sign-flip, erasure, anti-signal, zero-out, spike-plant")
      ->capture_default_str();
  corrupt->add_option("--mu", cor_mu, "Corruption fraction")->capture_default_str();
  corrupt->add_option("--sigma", cor_sigma, "Z2 signal strength used by anti-signal/spike-plant")
      ->capture_default_str();
  corrupt->add_option("--record-out", cor_record_out, "Where to write the corruption record JSON");
  corrupt->add_option("--map-out", cor_map_out, "Erasure only: where to write the surviving index map");
  corrupt->callback([&] {
    Rng rng(g.seed);
    if (looks_like_matrix(cor_input, cor_format)) {
      require(!g.out.empty(), "corrupting a matrix writes binary data and needs --out");
      require(!cor_labels.empty(), "Z2 corruption needs --labels");
      Z2Instance inst;
      inst.matrix = read_file<DenseMatrix>(cor_input, read_matrix, std::ios::binary);
      inst.n = static_cast<std::size_t>(inst.matrix.rows());
      inst.sigma = cor_sigma;
      inst.labels = LabelVector(read_file<SignVector>(cor_labels, read_labels));
      auto [out, record] = corrupt_z2(inst, cor_adversary, cor_mu, rng);
      write_file(g.out, [&](std::ostream& os) { write_matrix(os, out.matrix); }, std::ios::binary);
      if (!cor_record_out.empty())
        write_file(cor_record_out, [&](std::ostream& os) { os << json(record).dump(2) << '\n'; });
      return;
    }
    const Graph graph = read_file<Graph>(cor_input, read_edge_list);
    std::ostringstream os;
    if (cor_adversary == "erasure") {
      const ErasureResult erased = erasure_adversary(graph, cor_mu, rng);
      write_edge_list(os, erased.graph);
      if (!cor_map_out.empty())
        write_file(cor_map_out, [&](std::ostream& m) { m << json(erased.index_map).dump() << '\n'; });
    } else {
      require(!cor_labels.empty(), "node corruption needs --labels");
      const LabelVector labels(read_file<SignVector>(cor_labels, read_labels));
      auto [out, record] = corrupt_nodes(graph, labels, cor_adversary, cor_mu, rng);
      write_edge_list(os, out);
      if (!cor_record_out.empty())
        write_file(cor_record_out, [&](std::ostream& r) { r << json(record).dump(2) << '\n'; });
    }
    emit(g, os.str());
  });

  // sdp -----------------------------------------------------------------
  auto* sdp = app.add_subcommand("sdp", "Solve the basic SDP of a graph or matrix");
  std::string sdp_input, sdp_format = "auto";
  bool sdp_centered = false;
  std::optional<double> sdp_d;
  int sdp_rank = 0, sdp_restarts = 5;
  sdp->add_option("--input", sdp_input, "Edge list or binary matrix")->required();
  sdp->add_option("--format", sdp_format, "edgelist, matrix or auto")->capture_default_str();
  sdp->add_flag("--centered", sdp_centered, "Use A - (d/n) J for graphs");
  sdp->add_option("--d", sdp_d, "Centering degree (defaults to the empirical average degree)");
  sdp->add_option("--rank", sdp_rank, "Factor rank; 0 picks max(8, ceil(sqrt(2n)))")->capture_default_str();
  sdp->add_option("--restarts", sdp_restarts, "Random restarts")->capture_default_str();
  sdp->callback([&] {
    SolverOptions opts;
    opts.rank = sdp_rank;
    opts.restarts = sdp_restarts;
    opts.seed = g.seed;
    SdpSolution sol;
    if (looks_like_matrix(sdp_input, sdp_format)) {
      sol = solve_basic_sdp(DenseSymmetric(read_file<DenseMatrix>(sdp_input, read_matrix, std::ios::binary)), opts);
    } else {
      const Graph graph = read_file<Graph>(sdp_input, read_edge_list);
      const double d = sdp_d.value_or(graph.average_degree());
      const double shift = sdp_centered ? d / static_cast<double>(graph.n()) : 0.0;
      sol = solve_basic_sdp(CenteredMatrix(graph, shift), opts);
    }
    emit_json(g, {{"value", sol.value}, {"dual_gap", sol.dual_gap}, {"iterations", sol.iterations},
                  {"converged", sol.converged}});
  });

  // spectral ------------------------------------------------------------
  auto* spectral = app.add_subcommand("spectral", "Zero out high-degree vertices and report the pruned norm");
  std::string spec_input;
  std::optional<double> spec_alpha, spec_d;
  spectral->add_option("--input", spec_input, "Edge list")->required();
  spectral->add_option("--alpha", spec_alpha, "Degree scale; vertices above 20 alpha are removed");
  spectral->add_option("--d", spec_d, "Centering degree (defaults to the empirical average degree)");
  spectral->callback([&] {
    const Graph graph = read_file<Graph>(spec_input, read_edge_list);
    const double d = spec_d.value_or(graph.average_degree());
    const PruneResult r = prune_high_degree(graph, spec_alpha.value_or(d), d);
    emit_json(g, {{"kept_count", r.kept.size()},
                  {"removed_fraction", r.removed_fraction},
                  {"norm_after", r.norm_after},
                  {"norm_after_over_sqrt_d", r.norm_after / std::sqrt(d)}});
  });

  // recover -------------------------------------------------------------
  auto* recover = app.add_subcommand("recover", "Recover community labels from a (corrupted) graph");
  std::string rec_mode = "dense", rec_input, rec_labels;
  double rec_d = 40, rec_eps = 0.2236, rec_mu = 0, rec_beta = kDefaultBeta;
  std::optional<double> rec_cdeg, rec_Delta, rec_null;
  int rec_restarts = 5;
  recover->add_option("--mode", rec_mode, "dense or sparse")->check(CLI::IsMember({"dense", "sparse"}));
  recover->add_option("--input", rec_input, "Edge list")->required();
  recover->add_option("--d", rec_d, "Model average degree")->capture_default_str();
  recover->add_option("--eps", rec_eps, "Model bias")->capture_default_str();
  recover->add_option("--mu", rec_mu, "Corruption budget")->capture_default_str();
  recover->add_option("--beta", rec_beta, "Pruning budget (dense mode)")->capture_default_str();
  recover->add_option("--labels", rec_labels, "Ground truth, to report the overlap");
  recover->add_option("--cdeg", rec_cdeg, "Degree multiplier override (sparse mode)");
  recover->add_option("--Delta", rec_Delta, "Push-out margin override (dense mode)");
  recover->add_option("--null-level", rec_null, "Null SDP level override (dense mode)");
  recover->add_option("--restarts", rec_restarts, "SDP restarts")->capture_default_str();
  recover->callback([&] {
    const Graph graph = read_file<Graph>(rec_input, read_edge_list);
    std::optional<LabelVector> truth;
    if (!rec_labels.empty()) truth = LabelVector(read_file<SignVector>(rec_labels, read_labels));
    Rng rng(g.seed);
    SolverOptions solver;
    solver.seed = derive_seed(g.seed, 1);
    solver.restarts = rec_restarts;
    json j;
    if (rec_mode == "dense") {
      ExperimentConfig c;
      c.n = graph.n();
      c.d = rec_d;
      c.eps = rec_eps;
      c.mu = rec_mu;
      c.beta = rec_beta;
      c.Delta = rec_Delta;
      c.null_level = rec_null;
      auto [params, source] = resolve_dense_params(c, solver);
      const DenseRecovery r = recover_dense_detailed(graph, params, rec_d, rec_eps, rng, truth ? &*truth : nullptr);
      j = r.estimate;
      j["calibration"] = source;
      j["certified_correlation_bound"] = certified_correlation_bound(params, graph.n(), rec_d, rec_eps);
    } else {
      SparseParams params = SparseParams::defaults(rec_d, rec_mu, graph.n());
      if (rec_cdeg) params.C_deg = *rec_cdeg;
      params.solver = solver;
      const SparseRecovery r = recover_sparse_detailed(graph, params, rec_d, rec_eps, rng, truth ? &*truth : nullptr);
      j = r.estimate;
      j["removal_log"] = r.pruned.log;
    }
    emit_json(g, j);
  });

  // z2 ------------------------------------------------------------------
  auto* z2 = app.add_subcommand("z2", "Run Z2 synchronization trials");
  ExperimentConfig z2c;
  z2c.model = ModelKind::kZ2;
  z2c.n = 500;
  z2c.trials = 1;
  std::string z2_algorithm = "dense";
  z2->add_option("--n", z2c.n, "Size")->capture_default_str();
  z2->add_option("--sigma", z2c.sigma, "Signal strength")->capture_default_str();
  z2->add_option("--mu", z2c.mu, "Corruption fraction")->capture_default_str();
  z2->add_option("--adversary", z2c.adversary, "none, anti-signal, zero-out or spike-plant")
      ->capture_default_str();
  z2->add_option("--trials", z2c.trials, "Trials")->capture_default_str();
  z2->add_option("--algorithm", z2_algorithm, "dense or basic-sdp-baseline")->capture_default_str();
  z2->add_option("--timeout", z2c.trial_timeout_s, "Per-trial wall-clock cap in seconds (0 = none)");
  z2->callback([&] {
    z2c.seed = g.seed;
    z2c.workers = workers_of(g);
    z2c.algorithm = parse_algorithm(z2_algorithm);
    emit_json(g, report_to_json(run_experiment(z2c)));
  });

  // run -----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run a full experiment and print its report");
  ExperimentConfig rc;
  std::string rc_model = "sbm", rc_algorithm = "dense";
  std::optional<double> rc_delta;
  bool rc_timing = false;
  run->add_option("--model", rc_model, "sbm or z2")->capture_default_str();
  run->add_option("--algorithm", rc_algorithm, "dense, sparse or basic-sdp-baseline")->capture_default_str();
  run->add_option("--n", rc.n, "Size")->capture_default_str();
  run->add_option("--d", rc.d, "Average degree")->capture_default_str();
  run->add_option("--eps", rc.eps, "Bias")->capture_default_str();
  run->add_option("--delta", rc_delta, "Distance to the threshold (sets eps)");
  run->add_option("--sigma", rc.sigma, "Z2 signal strength")->capture_default_str();
  run->add_option("--mu", rc.mu, "Corruption fraction")->capture_default_str();
  run->add_option("--adversary", rc.adversary, "Strategy tag, erasure or none")->capture_default_str();
  run->add_option("--trials", rc.trials, "Trials")->capture_default_str();
  run->add_option("--timeout", rc.trial_timeout_s, "Per-trial wall-clock cap in seconds (0 = none)");
  run->add_flag("--timing", rc_timing, "Include per-trial runtimes in the report");
  run->callback([&] {
    rc.model = parse_model(rc_model);
    rc.algorithm = parse_algorithm(rc_algorithm);
    if (rc_delta) rc.eps = SbmParams::eps_for_delta(rc.d, *rc_delta);
    rc.seed = g.seed;
    rc.workers = workers_of(g);
    emit_json(g, report_to_json(run_experiment(rc), rc_timing));
  });

  // sweep ---------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "Phase sweep over a parameter grid, written as CSV");
  ExperimentConfig sc;
  std::string sc_model = "sbm", sc_algorithm = "dense";
  std::vector<std::string> sc_axes;
  sweep->add_option("--model", sc_model, "sbm or z2")->capture_default_str();
  sweep->add_option("--algorithm", sc_algorithm, "dense, sparse or basic-sdp-baseline")->capture_default_str();
  sweep->add_option("--n", sc.n, "Size")->capture_default_str();
  sweep->add_option("--d", sc.d, "Average degree")->capture_default_str();
  sweep->add_option("--eps", sc.eps, "Bias")->capture_default_str();
  sweep->add_option("--sigma", sc.sigma, "Z2 signal strength")->capture_default_str();
  sweep->add_option("--mu", sc.mu, "Corruption fraction")->capture_default_str();
  sweep->add_option("--adversary", sc.adversary, "Strategy tag, erasure or none")->capture_default_str();
  sweep->add_option("--trials", sc.trials, "Trials per grid point")->capture_default_str();
  sweep->add_option("--axis", sc_axes, "name=v1,v2,...; several axes form a Cartesian grid")->required();
  sweep->callback([&] {
    sc.model = parse_model(sc_model);
    sc.algorithm = parse_algorithm(sc_algorithm);
    sc.seed = g.seed;
    sc.workers = workers_of(g);
    std::vector<SweepPoint> grid{{}};
    for (const std::string& axis : sc_axes) {
      const auto eq = axis.find('=');
      require(eq != std::string::npos, "axis must look like name=v1,v2");
      const std::string name = axis.substr(0, eq);
      std::vector<double> values;
      std::stringstream ss(axis.substr(eq + 1));
      for (std::string item; std::getline(ss, item, ',');) values.push_back(std::stod(item));
      require(!values.empty(), "axis '" + name + "' has no values");
      std::vector<SweepPoint> next;
      for (const auto& point : grid)
        for (double v : values) {
          SweepPoint p = point;
          p.emplace_back(name, v);
          next.push_back(std::move(p));
        }
      grid = std::move(next);
    }
    emit(g, phase_sweep(sc, grid).csv);
  });

  // calibrate -----------------------------------------------------------
  auto* calibrate = app.add_subcommand("calibrate", "Measure program constants on uncorrupted instances");
  std::string cal_kind = "dense";
  std::size_t cal_n = 1000;
  double cal_d = 40, cal_delta = 1, cal_mu = 0, cal_beta = kDefaultBeta, cal_sigma = 1.5;
  int cal_seeds = 20;
  calibrate->add_option("--kind", cal_kind, "dense, z2 or pruning")
      ->check(CLI::IsMember({"dense", "z2", "pruning"}));
  calibrate->add_option("--n", cal_n, "Size")->capture_default_str();
  calibrate->add_option("--d", cal_d, "Average degree")->capture_default_str();
  calibrate->add_option("--delta", cal_delta, "Distance to the threshold")->capture_default_str();
  calibrate->add_option("--mu", cal_mu, "Corruption budget the program will use")->capture_default_str();
  calibrate->add_option("--beta", cal_beta, "Pruning budget")->capture_default_str();
  calibrate->add_option("--sigma", cal_sigma, "Z2 signal strength")->capture_default_str();
  calibrate->add_option("--seeds", cal_seeds, "Instances per level")->capture_default_str();
  calibrate->callback([&] {
    const std::uint64_t base = derive_seed(kCalibrationSeed, g.seed);
    json j;
    if (cal_kind == "dense") {
      j = calibrate_dense(cal_n, cal_d, cal_delta, cal_mu, cal_beta, cal_seeds, base);
    } else if (cal_kind == "z2") {
      j = calibrate_z2(cal_n, cal_sigma, cal_mu, cal_seeds, base);
    } else {
      j = calibrate_pruning(cal_n, cal_d, cal_delta, cal_seeds, base);
    }
    j["version"] = kCalibrationVersion;
    emit_json(g, j);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "ksrobust: " << e.what() << '\n';
    return e.code() == ErrorCode::kInvalidParameter ? 2 : 1;
  }
  return 0;
}
