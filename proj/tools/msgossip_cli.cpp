#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "msgossip/harness.hpp"
#include "msgossip/kernels.hpp"
#include "msgossip/theory.hpp"
#include "msgossip/topology.hpp"

namespace {

int run_config(msgossip::harness::ExperimentConfig cfg) {
  const auto result = msgossip::harness::run_experiment(cfg);
  const int code = msgossip::harness::write_outputs(result);
  std::cout << cfg.experiment << ": " << result.rows.size() << " rows -> " << cfg.outdir
            << (result.any_aborted ? " (with aborted rows)" : "") << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"msgossip: multiscale gossip averaging simulator"};
  app.require_subcommand(1);

  // generate: graph fixtures
  auto* gen = app.add_subcommand("generate", "Generate a random geometric graph fixture (JSON)");
  int gen_n = 1000;
  double gen_c = 3.0;
  std::uint64_t gen_seed = 1;
  bool gen_connected = false;
  int gen_attempts = 100;
  std::string gen_out = "graph.json";
  gen->add_option("--n", gen_n, "node count")->check(CLI::PositiveNumber);
  gen->add_option("--c", gen_c, "radius constant (r = sqrt(c ln n / n))");
  gen->add_option("--seed", gen_seed, "placement seed");
  gen->add_flag("--connected", gen_connected, "retry seeds until connected");
  gen->add_option("--attempts", gen_attempts, "max retries for --connected");
  gen->add_option("--out", gen_out, "output path");

  // run: single experiment
  auto* run = app.add_subcommand("run", "Run one experiment");
  msgossip::harness::ExperimentConfig rc;
  rc.rep_policy.clear();
  std::vector<int> run_n, run_k;
  std::vector<std::uint64_t> run_seeds;
  std::vector<double> run_p;
  std::vector<std::string> run_algos;
  run->add_option("--experiment", rc.experiment,
                  "levels_sweep | vs_baselines | cdf | handshake_sweep | loss | heatmap | "
                  "node_util | scaling_fit")
      ->required();
  run->add_option("--n", run_n, "graph sizes");
  run->add_option("--c", rc.c, "radius constant");
  run->add_option("--epsilon", rc.epsilon, "per-invocation accuracy");
  run->add_option("--k", run_k, "hierarchy levels (empty = auto)");
  run->add_option("--m", rc.auto_m, "auto-levels lower bound");
  run->add_option("--M", rc.auto_M, "auto-levels upper bound");
  run->add_option("--a", rc.a, "subdivision parameter");
  run->add_option("--seeds", run_seeds, "seed list");
  run->add_option("--p", run_p, "transport success probabilities");
  run->add_option("--algorithms", run_algos, "algorithm list");
  run->add_option("--outdir", rc.outdir, "output directory");
  run->add_option("--init", rc.init_mode, "initial values: uniform | spike");
  run->add_option("--r-bins", rc.r_bins, "spatial grid resolution");
  run->add_option("--runs-per-graph", rc.runs_per_graph, "heatmap runs per graph");
  run->add_option("--budget-factor", rc.budget_factor, "loss budget (x reliable total)");
  run->add_option("--c-fi", rc.c_fi, "fixed-iteration constant");
  run->add_option("--rep-policy", rc.rep_policy, "center | random");
  run->add_option("--workers", rc.workers, "worker threads (0 = hardware)");

  // sweep: config-file driven
  auto* sweep = app.add_subcommand("sweep", "Run experiments from a JSON config file");
  std::string sweep_config;
  std::string sweep_outdir;
  sweep->add_option("--config", sweep_config, "config file (object or array)")->required();
  sweep->add_option("--outdir", sweep_outdir, "override output directory");

  // predict: theory module outputs
  auto* predict = app.add_subcommand("predict", "Analytical predictions (JSON to stdout)");
  int pr_n = 1000, pr_k = 0;
  double pr_a = 2.0 / 3.0, pr_eps = 1e-4, pr_m = 2.0, pr_M = 12.0;
  std::string pr_out;
  predict->add_option("--n", pr_n, "network size")->check(CLI::PositiveNumber);
  predict->add_option("--k", pr_k, "levels (0 = auto)");
  predict->add_option("--a", pr_a, "subdivision parameter");
  predict->add_option("--epsilon", pr_eps, "per-invocation accuracy");
  predict->add_option("--m", pr_m, "auto-levels lower bound");
  predict->add_option("--M", pr_M, "auto-levels upper bound");
  predict->add_option("--out", pr_out, "write to file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const msgossip::GeoGraph g =
          gen_connected ? msgossip::generate_rgg_connected(gen_n, gen_c, gen_seed, gen_attempts)
                        : msgossip::generate_rgg(gen_n, gen_c, gen_seed);
      std::ofstream f(gen_out, std::ios::trunc);
      if (!f) throw std::runtime_error("cannot write " + gen_out);
      f << msgossip::graph_to_json(g).dump(2) << "\n";
      std::cout << "graph n=" << g.n << " radius=" << g.radius << " seed=" << g.seed
                << " edges=" << g.edge_count() << " -> " << gen_out << "\n";
      return 0;
    }
    if (run->parsed()) {
      rc.n = run_n;
      rc.k = run_k;
      rc.seeds = run_seeds;
      rc.p = run_p;
      rc.algorithms = run_algos;
      return run_config(rc);
    }
    if (sweep->parsed()) {
      std::ifstream f(sweep_config);
      if (!f) throw std::invalid_argument("cannot read " + sweep_config);
      nlohmann::json j = nlohmann::json::parse(f);
      std::vector<msgossip::harness::ExperimentConfig> cfgs;
      if (j.is_array()) {
        for (const auto& e : j) cfgs.push_back(msgossip::harness::ExperimentConfig::from_json(e));
      } else {
        cfgs.push_back(msgossip::harness::ExperimentConfig::from_json(j));
      }
      int code = 0;
      for (auto& cfg : cfgs) {
        if (!sweep_outdir.empty()) cfg.outdir = sweep_outdir;
        code = std::max(code, run_config(cfg));
      }
      return code;
    }
    if (predict->parsed()) {
      int k = pr_k;
      if (k <= 0) k = msgossip::auto_levels(pr_n, pr_a, pr_m, pr_M).k;
      const auto cost = msgossip::theory::predicted_cost(pr_n, k, pr_eps, pr_a);
      const auto err = msgossip::theory::error_bound(pr_n, k, pr_eps, pr_a);
      const std::string text = msgossip::theory::prediction_to_json(cost, err).dump(2) + "\n";
      if (pr_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(pr_out, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + pr_out);
        f << text;
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
