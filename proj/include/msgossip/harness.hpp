#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "msgossip/gossip.hpp"
#include "msgossip/multiscale.hpp"
#include "msgossip/theory.hpp"

namespace msgossip::harness {

// Experiment runner reproducing the evaluation at desk scale: seeded
// multi-run sweeps with machine-readable outputs. Every row is a pure
// function of (config, seed); re-running a sweep regenerates byte-identical
// files. All algorithms at one config point consume the identical graph and
// initial values.

struct ExperimentConfig {
  std::string experiment;  // levels_sweep | vs_baselines | cdf | handshake_sweep |
                           // loss | heatmap | node_util | scaling_fit
  std::vector<int> n;
  double c = 3.0;
  double epsilon = 1e-4;
  std::vector<int> k;  // explicit level counts (levels_sweep); single value elsewhere; empty = auto
  double auto_m = 2.0;
  double auto_M = 12.0;
  double a = 2.0 / 3.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> p;  // transport parameter sweep
  std::vector<std::string> algorithms;
  std::string outdir = "out";
  std::string init_mode = "uniform";  // uniform | spike
  int r_bins = 50;
  int runs_per_graph = 20;     // heatmap
  double budget_factor = 50.0;  // loss: budget = factor x reliable total
  double c_fi = 1.0;
  std::string rep_policy = "center";  // center | random
  int workers = 0;                    // 0 = hardware concurrency

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct RunRow {
  std::string experiment;
  std::string algorithm;
  int n = 0;
  int k = 0;       // levels used; 1 = flat randomized gossip, 0 = non-hierarchical
  double a = 0.0;  // 0 for non-hierarchical algorithms
  double epsilon = 0.0;
  double p = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t total_transmissions = 0;
  double final_rel_error = 0.0;
  int max_hops = 0;
  std::uint64_t iterations = 0;
  std::uint64_t duration = 0;  // logical makespan (see README), not wall time
  bool aborted = false;        // JSON mirror only; not a CSV column
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRow> rows;
  nlohmann::json extras;  // experiment-specific summaries
  std::map<std::string, std::vector<double>> grids;        // algorithm -> R x R mass
  std::vector<std::pair<std::string, std::string>> files;  // extra (filename, contents)
  bool any_aborted = false;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes <experiment>.csv, <experiment>_summary.csv, <experiment>.json,
// per-algorithm <experiment>_<algorithm>_grid.csv, and any extra files, all
// atomically (temp file + rename). Returns process exit code: 0 clean,
// 1 if any row aborted.
int write_outputs(const ExperimentResult& result);

// CSV fragments shared with the CLI.
std::string rows_to_csv(const std::vector<RunRow>& rows);
std::string ledger_to_csv(const Ledger& ledger);
std::string grid_to_csv(const std::vector<double>& grid, int r_bins);
std::string format_double(double v);

// Mean mass density in the central square of `area_fraction`, relative to
// uniform (1.0 = perfectly even load).
double central_excess(const std::vector<double>& grid, int r_bins, double area_fraction = 0.2);

// Least-squares slope of log(total) vs log(n).
double loglog_slope(const std::vector<double>& ns, const std::vector<double>& totals);

// Initial values: i.i.d. uniform[0,1] from a dedicated stream, or `spike`
// (node 0 holds 1, the rest 0).
std::vector<double> initial_values(int n, const std::string& mode, std::uint64_t seed);

}  // namespace msgossip::harness
