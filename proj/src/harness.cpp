#include "msgossip/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "msgossip/baselines.hpp"

namespace msgossip::harness {

namespace {

const std::set<std::string> kExperiments = {"levels_sweep", "vs_baselines",    "cdf",
                                            "handshake_sweep", "loss",         "heatmap",
                                            "node_util",       "scaling_fit"};
const std::set<std::string> kAlgorithms = {"multiscale",     "multiscale_fi",
                                           "two_level",      "path_averaging",
                                           "geographic_gossip", "randomized_gossip"};

std::uint64_t name_tag(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <class T>
std::vector<T> get_list(const nlohmann::json& j) {
  std::vector<T> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(v.get<T>());
  } else {
    out.push_back(j.get<T>());
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.rep_policy = "";  // resolved per experiment
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") cfg.experiment = value.get<std::string>();
    else if (key == "n") cfg.n = get_list<int>(value);
    else if (key == "c") cfg.c = value.get<double>();
    else if (key == "epsilon") cfg.epsilon = value.get<double>();
    else if (key == "k") cfg.k = get_list<int>(value);
    else if (key == "m") cfg.auto_m = value.get<double>();
    else if (key == "M") cfg.auto_M = value.get<double>();
    else if (key == "a") cfg.a = value.get<double>();
    else if (key == "seeds") cfg.seeds = get_list<std::uint64_t>(value);
    else if (key == "p") cfg.p = get_list<double>(value);
    else if (key == "algorithms") cfg.algorithms = get_list<std::string>(value);
    else if (key == "outdir") cfg.outdir = value.get<std::string>();
    else if (key == "init_mode") cfg.init_mode = value.get<std::string>();
    else if (key == "r_bins") cfg.r_bins = value.get<int>();
    else if (key == "runs_per_graph") cfg.runs_per_graph = value.get<int>();
    else if (key == "budget_factor") cfg.budget_factor = value.get<double>();
    else if (key == "c_fi") cfg.c_fi = value.get<double>();
    else if (key == "rep_policy") cfg.rep_policy = value.get<std::string>();
    else if (key == "workers") cfg.workers = value.get<int>();
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"experiment", experiment}, {"n", n},           {"c", c},
          {"epsilon", epsilon},       {"k", k},           {"m", auto_m},
          {"M", auto_M},              {"a", a},           {"seeds", seeds},
          {"p", p},                   {"algorithms", algorithms},
          {"outdir", outdir},         {"init_mode", init_mode},
          {"r_bins", r_bins},         {"runs_per_graph", runs_per_graph},
          {"budget_factor", budget_factor}, {"c_fi", c_fi},
          {"rep_policy", rep_policy}, {"workers", workers}};
}

std::vector<double> initial_values(int n, const std::string& mode, std::uint64_t seed) {
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  if (mode == "spike") {
    if (n > 0) v[0] = 1.0;
    return v;
  }
  if (mode != "uniform") throw std::invalid_argument("init_mode must be uniform or spike");
  Rng rng(seed);
  for (auto& x : v) x = rng.uniform01();
  return v;
}

double central_excess(const std::vector<double>& grid, int r_bins, double area_fraction) {
  const double half = 0.5 * std::sqrt(area_fraction);
  double mass = 0.0;
  long long bins = 0;
  for (int row = 0; row < r_bins; ++row) {
    const double cy = (row + 0.5) / r_bins;
    if (cy < 0.5 - half || cy > 0.5 + half) continue;
    for (int col = 0; col < r_bins; ++col) {
      const double cx = (col + 0.5) / r_bins;
      if (cx < 0.5 - half || cx > 0.5 + half) continue;
      mass += grid[static_cast<std::size_t>(row) * r_bins + col];
      ++bins;
    }
  }
  if (bins == 0) return 0.0;
  const double area_share = static_cast<double>(bins) / (static_cast<double>(r_bins) * r_bins);
  return mass / area_share;
}

double loglog_slope(const std::vector<double>& ns, const std::vector<double>& totals) {
  if (ns.size() != totals.size() || ns.size() < 2)
    throw std::invalid_argument("loglog_slope: need matching lists of >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double lx = std::log(ns[i]);
    const double ly = std::log(totals[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

namespace {

struct AlgoParams {
  double epsilon = 1e-4;
  int k = 0;  // 0 = auto
  double auto_m = 2.0, auto_M = 12.0;
  double a = 2.0 / 3.0;
  double c_fi = 0.5;
  RepPolicy rep_policy = RepPolicy::kCenterClosest;
  FailureModel transport = FailureModel::reliable();
  GossipLimits limits;
  std::uint64_t run_seed = 0;
};

struct AlgoOutcome {
  std::uint64_t total = 0;
  double final_rel_error = 0.0;
  double best_rel_error = 0.0;
  int max_hops = 0;
  std::uint64_t iterations = 0;
  std::uint64_t duration = 0;
  int k_used = 0;
  double a_used = 0.0;
  bool aborted = false;
  bool budget_exhausted = false;
  bool stagnated = false;
  bool oracle_met = false;
  Ledger ledger;
  std::vector<int> rep_counts;
};

AlgoOutcome from_multiscale(MultiscaleOutcome&& out) {
  AlgoOutcome ao;
  ao.total = out.ledger.total;
  ao.final_rel_error = out.final_rel_error;
  ao.best_rel_error = out.final_rel_error;
  ao.max_hops = out.ledger.max_hops_seen;
  ao.iterations = out.iterations;
  ao.duration = out.makespan;
  ao.k_used = out.k_used;
  ao.a_used = out.a_used;
  ao.aborted = out.cap_hit;
  ao.budget_exhausted = out.budget_exhausted;
  ao.oracle_met = !out.cap_hit && !out.budget_exhausted;
  ao.ledger = std::move(out.ledger);
  ao.rep_counts = std::move(out.rep_counts);
  return ao;
}

AlgoOutcome from_run(GossipRun&& run, int k_used) {
  AlgoOutcome ao;
  ao.total = run.ledger.total;
  ao.final_rel_error = run.result.final_rel_error;
  ao.best_rel_error = run.result.best_rel_error;
  ao.max_hops = run.ledger.max_hops_seen;
  ao.iterations = run.result.iterations;
  ao.duration = run.result.iterations;
  ao.k_used = k_used;
  ao.a_used = 0.0;
  ao.aborted = run.result.hit_cap;
  ao.budget_exhausted = run.result.budget_exhausted;
  ao.stagnated = run.result.stagnated;
  ao.oracle_met = run.result.oracle_met;
  ao.ledger = std::move(run.ledger);
  return ao;
}

AlgoOutcome run_algorithm(const std::string& alg, const GeoGraph& g,
                          const std::vector<double>& init, const AlgoParams& ap) {
  if (alg == "multiscale" || alg == "multiscale_fi") {
    MultiscaleConfig cfg;
    cfg.k = ap.k;
    cfg.auto_m = ap.auto_m;
    cfg.auto_M = ap.auto_M;
    cfg.a = ap.a;
    cfg.epsilon = ap.epsilon;
    cfg.stopping = alg == "multiscale_fi" ? MultiscaleConfig::Stopping::kFixedIterations
                                          : MultiscaleConfig::Stopping::kOracle;
    cfg.c_fi = ap.c_fi;
    cfg.rep_policy = ap.rep_policy;
    cfg.transport = ap.transport;
    cfg.limits = ap.limits;
    return from_multiscale(multiscale_gossip(g, init, cfg, ap.run_seed));
  }
  if (alg == "two_level") {
    return from_multiscale(
        two_level_gossip(g, init, ap.epsilon, ap.transport, ap.run_seed, ap.limits));
  }
  const StoppingRule stop = StoppingRule::oracle(ap.epsilon);
  if (alg == "path_averaging")
    return from_run(path_averaging(g, init, stop, ap.transport, ap.run_seed, ap.limits), 0);
  if (alg == "geographic_gossip")
    return from_run(geographic_gossip(g, init, stop, ap.transport, ap.run_seed, ap.limits), 0);
  if (alg == "randomized_gossip")
    return from_run(randomized_gossip(g, init, stop, ap.transport, ap.run_seed, ap.limits), 1);
  throw std::invalid_argument("unknown algorithm '" + alg + "'");
}

void parallel_tasks(int count, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

RepPolicy parse_policy(const std::string& s) {
  if (s == "center") return RepPolicy::kCenterClosest;
  if (s == "random") return RepPolicy::kRandom;
  throw std::invalid_argument("rep_policy must be center or random");
}

// Per-point state shared by the experiment drivers.
struct Point {
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<RunRow> rows;
  nlohmann::json extras = nlohmann::json::array();
  std::map<std::string, std::vector<double>> grids;
  std::vector<std::string> file_lines;  // per-node records etc.
  bool aborted = false;
};

struct Driver {
  ExperimentConfig cfg;
  RepPolicy policy = RepPolicy::kCenterClosest;

  RunRow base_row(const std::string& alg, int n, std::uint64_t seed) const {
    RunRow r;
    r.experiment = cfg.experiment;
    r.algorithm = alg;
    r.n = n;
    r.epsilon = cfg.epsilon;
    r.seed = seed;
    return r;
  }

  RunRow fill_row(RunRow r, const AlgoOutcome& ao, double p) const {
    r.k = ao.k_used;
    r.a = ao.a_used;
    r.p = p;
    r.total_transmissions = ao.total;
    r.final_rel_error = ao.final_rel_error;
    r.max_hops = ao.max_hops;
    r.iterations = ao.iterations;
    r.duration = ao.duration;
    r.aborted = ao.aborted;
    return r;
  }

  AlgoParams params_for(const std::string& alg, std::uint64_t seed) const {
    AlgoParams ap;
    ap.epsilon = cfg.epsilon;
    ap.k = cfg.k.empty() ? 0 : cfg.k.front();
    ap.auto_m = cfg.auto_m;
    ap.auto_M = cfg.auto_M;
    ap.a = cfg.a;
    ap.c_fi = cfg.c_fi;
    ap.rep_policy = policy;
    ap.run_seed = derive_seed(seed, {name_tag(alg)});
    return ap;
  }
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& raw) {
  ExperimentConfig cfg = raw;

  // Per-experiment defaults for fields the caller left empty.
  if (kExperiments.find(cfg.experiment) == kExperiments.end())
    throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
  if (cfg.n.empty()) {
    if (cfg.experiment == "vs_baselines") cfg.n = {500, 1000, 2000};
    else if (cfg.experiment == "handshake_sweep") cfg.n = {1000};
    else if (cfg.experiment == "loss") cfg.n = {500, 1000};
    else if (cfg.experiment == "node_util") cfg.n = {5000};
    else if (cfg.experiment == "scaling_fit") cfg.n = {500, 1000, 2000, 4000, 8000};
    else if (cfg.experiment == "cdf") cfg.n = {2000};
    else if (cfg.experiment == "heatmap") cfg.n = {1000};
    else cfg.n = {2000};
  }
  if (cfg.seeds.empty()) {
    const int default_seeds = cfg.experiment == "handshake_sweep" ? 25
                              : cfg.experiment == "heatmap"       ? 20
                              : cfg.experiment == "node_util"     ? 5
                              : cfg.experiment == "scaling_fit"   ? 5
                                                                  : 10;
    for (int i = 1; i <= default_seeds; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
  }
  if (cfg.k.empty() && cfg.experiment == "levels_sweep") cfg.k = {2, 3, 4, 5, 6};
  if (cfg.k.empty() && cfg.experiment == "node_util") cfg.k = {5};
  if (cfg.algorithms.empty()) {
    if (cfg.experiment == "vs_baselines")
      cfg.algorithms = {"multiscale", "multiscale_fi", "two_level", "path_averaging"};
    else if (cfg.experiment == "levels_sweep" || cfg.experiment == "scaling_fit" ||
             cfg.experiment == "node_util")
      cfg.algorithms = {"multiscale"};
    else
      cfg.algorithms = {"multiscale", "path_averaging"};
  }
  if (cfg.p.empty()) {
    if (cfg.experiment == "handshake_sweep") cfg.p = {0.5, 0.75, 1.0};
    else if (cfg.experiment == "loss") cfg.p = {0.9};
    else cfg.p = {1.0};
  }
  if (cfg.rep_policy.empty())
    cfg.rep_policy = cfg.experiment == "node_util" ? "random" : "center";

  for (const auto& alg : cfg.algorithms)
    if (kAlgorithms.find(alg) == kAlgorithms.end())
      throw std::invalid_argument("unknown algorithm '" + alg + "'");
  for (double p : cfg.p)
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p values must lie in (0,1]");
  for (int n : cfg.n)
    if (n < 1) throw std::invalid_argument("n values must be positive");
  if (cfg.seeds.empty()) throw std::invalid_argument("seeds must be nonempty");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (cfg.r_bins < 1) throw std::invalid_argument("r_bins must be positive");

  Driver drv{cfg, parse_policy(cfg.rep_policy)};

  // Task grid: one point per (n, seed); every algorithm/p at a point shares
  // the graph and the initial values.
  std::vector<Point> points;
  for (int n : cfg.n)
    for (std::uint64_t seed : cfg.seeds) points.push_back(Point{n, seed, {}, {}, {}, {}, false});

  const auto run_point = [&](int idx) {
    Point& pt = points[idx];
    try {
      const GeoGraph g = generate_rgg_connected(pt.n, cfg.c, pt.seed);
      const std::vector<double> init =
          initial_values(pt.n, cfg.init_mode, derive_seed(pt.seed, {kSeedInitValues}));

      if (cfg.experiment == "levels_sweep") {
        for (int k : cfg.k) {
          AlgoParams ap = drv.params_for("multiscale", pt.seed);
          ap.k = k;
          const AlgoOutcome ao = run_algorithm("multiscale", g, init, ap);
          pt.rows.push_back(drv.fill_row(drv.base_row("multiscale", pt.n, pt.seed), ao, 1.0));
          pt.aborted |= ao.aborted;
        }
      } else if (cfg.experiment == "vs_baselines" || cfg.experiment == "scaling_fit") {
        for (const auto& alg : cfg.algorithms) {
          const AlgoOutcome ao = run_algorithm(alg, g, init, drv.params_for(alg, pt.seed));
          pt.rows.push_back(drv.fill_row(drv.base_row(alg, pt.n, pt.seed), ao, 1.0));
          pt.aborted |= ao.aborted;
        }
      } else if (cfg.experiment == "cdf") {
        std::vector<std::uint64_t> ms_sends, pa_sends;
        for (const auto& alg : cfg.algorithms) {
          const AlgoOutcome ao = run_algorithm(alg, g, init, drv.params_for(alg, pt.seed));
          pt.rows.push_back(drv.fill_row(drv.base_row(alg, pt.n, pt.seed), ao, 1.0));
          pt.aborted |= ao.aborted;
          for (int i = 0; i < pt.n; ++i) {
            pt.file_lines.push_back(alg + "," + std::to_string(pt.n) + "," +
                                    std::to_string(pt.seed) + "," + std::to_string(i) + "," +
                                    std::to_string(ao.ledger.per_node[i]));
          }
          if (alg == "multiscale") ms_sends = ao.ledger.per_node;
          if (alg == "path_averaging") pa_sends = ao.ledger.per_node;
        }
        if (!ms_sends.empty() && !pa_sends.empty()) {
          const std::uint64_t ms_max = *std::max_element(ms_sends.begin(), ms_sends.end());
          const auto below = static_cast<double>(
              std::count_if(pa_sends.begin(), pa_sends.end(),
                            [&](std::uint64_t s) { return s <= ms_max; }));
          pt.extras.push_back({{"n", pt.n},
                               {"seed", pt.seed},
                               {"ms_max_sends", ms_max},
                               {"f_pa_at_ms_max", below / pt.n}});
        }
      } else if (cfg.experiment == "handshake_sweep") {
        for (const auto& alg : cfg.algorithms) {
          for (double p : cfg.p) {
            AlgoParams ap = drv.params_for(alg, pt.seed);
            ap.transport = FailureModel::handshake(p);
            const AlgoOutcome ao = run_algorithm(alg, g, init, ap);
            pt.rows.push_back(drv.fill_row(drv.base_row(alg, pt.n, pt.seed), ao, p));
            pt.aborted |= ao.aborted;
          }
        }
      } else if (cfg.experiment == "loss") {
        for (const auto& alg : cfg.algorithms) {
          const AlgoOutcome ref = run_algorithm(alg, g, init, drv.params_for(alg, pt.seed));
          for (double p : cfg.p) {
            AlgoParams ap = drv.params_for(alg, pt.seed);
            ap.transport = FailureModel::lossy(p);
            if (p < 1.0) {
              ap.limits.budget_total =
                  static_cast<std::uint64_t>(cfg.budget_factor * static_cast<double>(ref.total));
              // plateau detector: a whole reliable-run's worth of charges
              // with < 1% improvement in the best error means the loss floor
              // has been reached
              ap.limits.stagnation_window = std::max<std::uint64_t>(1000, ref.total);
            }
            AlgoOutcome ao = run_algorithm(alg, g, init, ap);
            ao.final_rel_error = ao.best_rel_error;  // best achieved accuracy
            pt.rows.push_back(drv.fill_row(drv.base_row(alg, pt.n, pt.seed), ao, p));
            pt.aborted |= ao.aborted;
            pt.extras.push_back(
                {{"algorithm", alg},
                 {"n", pt.n},
                 {"seed", pt.seed},
                 {"p", p},
                 {"best_rel_error", ao.best_rel_error},
                 {"reliable_total", ref.total},
                 {"budget", ap.limits.budget_total},
                 {"stop_reason", ao.oracle_met        ? "target"
                                 : ao.budget_exhausted ? "budget"
                                 : ao.stagnated        ? "stagnated"
                                                       : "cap"}});
          }
        }
      } else if (cfg.experiment == "heatmap") {
        for (const auto& alg : cfg.algorithms) {
          auto& grid = pt.grids[alg];
          grid.assign(static_cast<std::size_t>(cfg.r_bins) * cfg.r_bins, 0.0);
          for (int run = 0; run < cfg.runs_per_graph; ++run) {
            const std::vector<double> run_init = initial_values(
                pt.n, cfg.init_mode,
                derive_seed(pt.seed, {kSeedInitValues, static_cast<std::uint64_t>(run)}));
            AlgoParams ap = drv.params_for(alg, pt.seed);
            ap.run_seed = derive_seed(pt.seed, {name_tag(alg), static_cast<std::uint64_t>(run)});
            const AlgoOutcome ao = run_algorithm(alg, g, run_init, ap);
            RunRow row = drv.fill_row(drv.base_row(alg, pt.n, pt.seed), ao, 1.0);
            row.seed = ap.run_seed;
            pt.rows.push_back(row);
            pt.aborted |= ao.aborted;
            const auto run_grid = spatial_grid(ao.ledger, g, cfg.r_bins);
            for (std::size_t i = 0; i < grid.size(); ++i) grid[i] += run_grid[i];
          }
        }
      } else if (cfg.experiment == "node_util") {
        for (const auto& alg : cfg.algorithms) {
          const AlgoOutcome ao = run_algorithm(alg, g, init, drv.params_for(alg, pt.seed));
          pt.rows.push_back(drv.fill_row(drv.base_row(alg, pt.n, pt.seed), ao, 1.0));
          pt.aborted |= ao.aborted;
          for (int i = 0; i < pt.n; ++i) {
            const int reps = ao.rep_counts.empty() ? 0 : ao.rep_counts[i];
            pt.file_lines.push_back(std::to_string(pt.seed) + "," + std::to_string(i) + "," +
                                    std::to_string(reps) + "," +
                                    std::to_string(ao.ledger.per_node[i]));
          }
        }
      }
    } catch (const std::exception& e) {
      pt.aborted = true;
      pt.extras.push_back({{"n", pt.n}, {"seed", pt.seed}, {"error", e.what()}});
    }
  };

  parallel_tasks(static_cast<int>(points.size()), cfg.workers, run_point);

  // Deterministic reduce in task order.
  ExperimentResult result;
  result.config = cfg;
  nlohmann::json point_extras = nlohmann::json::array();
  std::vector<std::string> node_lines;
  std::map<std::string, std::vector<double>> grid_sum;
  for (const Point& pt : points) {
    result.any_aborted |= pt.aborted;
    for (const auto& r : pt.rows) result.rows.push_back(r);
    for (const auto& e : pt.extras) point_extras.push_back(e);
    for (const auto& l : pt.file_lines) node_lines.push_back(l);
    for (const auto& [alg, grid] : pt.grids) {
      auto& acc = grid_sum[alg];
      if (acc.empty()) acc.assign(grid.size(), 0.0);
      for (std::size_t i = 0; i < grid.size(); ++i) acc[i] += grid[i];
    }
  }

  result.extras["points"] = point_extras;

  if (!grid_sum.empty()) {
    nlohmann::json excess = nlohmann::json::object();
    for (auto& [alg, grid] : grid_sum) {
      const double norm = std::accumulate(grid.begin(), grid.end(), 0.0);
      if (norm > 0.0)
        for (double& v : grid) v /= norm;
      excess[alg] = central_excess(grid, cfg.r_bins);
      result.grids[alg] = std::move(grid);
    }
    result.extras["central_excess"] = excess;
  }

  if (cfg.experiment == "cdf" && !node_lines.empty()) {
    std::string contents = "algorithm,n,seed,node_id,sends\n";
    for (const auto& l : node_lines) contents += l + "\n";
    result.files.emplace_back(cfg.experiment + "_nodes.csv", std::move(contents));
    double f_sum = 0.0;
    int f_count = 0;
    for (const auto& e : point_extras) {
      if (e.contains("f_pa_at_ms_max")) {
        f_sum += e["f_pa_at_ms_max"].get<double>();
        ++f_count;
      }
    }
    if (f_count > 0) result.extras["f_pa_at_ms_max_mean"] = f_sum / f_count;
  }

  if (cfg.experiment == "node_util" && !node_lines.empty()) {
    std::string contents = "seed,node_id,times_representative,sends\n";
    for (const auto& l : node_lines) contents += l + "\n";
    result.files.emplace_back(cfg.experiment + "_nodes.csv", std::move(contents));

    // Per-class summary over all seeds: times-representative -> sends stats.
    std::map<int, std::vector<double>> classes;
    double all_sum = 0.0, all_sq = 0.0;
    long long all_n = 0;
    for (const auto& l : node_lines) {
      // seed,node,reps,sends
      const auto p1 = l.find(',');
      const auto p2 = l.find(',', p1 + 1);
      const auto p3 = l.find(',', p2 + 1);
      const int reps = std::stoi(l.substr(p2 + 1, p3 - p2 - 1));
      const double sends = std::stod(l.substr(p3 + 1));
      classes[reps].push_back(sends);
      all_sum += sends;
      all_sq += sends * sends;
      ++all_n;
    }
    std::string cls = "times_representative,nodes,mean_sends,std_sends\n";
    nlohmann::json cls_json = nlohmann::json::array();
    for (const auto& [reps, sends] : classes) {
      const double m = std::accumulate(sends.begin(), sends.end(), 0.0) / sends.size();
      double var = 0.0;
      for (double s : sends) var += (s - m) * (s - m);
      var /= sends.size();
      cls += std::to_string(reps) + "," + std::to_string(sends.size()) + "," +
             format_double(m) + "," + format_double(std::sqrt(var)) + "\n";
      cls_json.push_back({{"times_representative", reps},
                          {"nodes", sends.size()},
                          {"mean_sends", m},
                          {"std_sends", std::sqrt(var)}});
    }
    const double all_mean = all_n > 0 ? all_sum / all_n : 0.0;
    const double all_std =
        all_n > 0 ? std::sqrt(std::max(0.0, all_sq / all_n - all_mean * all_mean)) : 0.0;
    cls += "all," + std::to_string(all_n) + "," + format_double(all_mean) + "," +
           format_double(all_std) + "\n";
    result.files.emplace_back(cfg.experiment + "_classes.csv", std::move(cls));
    result.extras["classes"] = cls_json;
    result.extras["all_nodes_mean"] = all_mean;
    result.extras["all_nodes_std"] = all_std;
  }

  if (cfg.experiment == "scaling_fit") {
    std::vector<double> ns, means;
    for (int n : cfg.n) {
      double sum = 0.0;
      int count = 0;
      for (const auto& r : result.rows) {
        if (r.n == n && !r.aborted) {
          sum += static_cast<double>(r.total_transmissions);
          ++count;
        }
      }
      if (count > 0) {
        ns.push_back(static_cast<double>(n));
        means.push_back(sum / count);
      }
    }
    if (ns.size() >= 2) {
      result.extras["slope"] = loglog_slope(ns, means);
      result.extras["mean_totals"] = means;
      result.extras["n"] = ns;
    }
  }

  return result;
}

std::string rows_to_csv(const std::vector<RunRow>& rows) {
  std::string out =
      "experiment,algorithm,n,k,a,epsilon,p,seed,total_transmissions,final_rel_error,max_hops,"
      "iterations,duration\n";
  for (const auto& r : rows) {
    out += r.experiment + "," + r.algorithm + "," + std::to_string(r.n) + "," +
           std::to_string(r.k) + "," + format_double(r.a) + "," + format_double(r.epsilon) + "," +
           format_double(r.p) + "," + std::to_string(r.seed) + "," +
           std::to_string(r.total_transmissions) + "," + format_double(r.final_rel_error) + "," +
           std::to_string(r.max_hops) + "," + std::to_string(r.iterations) + "," +
           std::to_string(r.duration) + "\n";
  }
  return out;
}

std::string ledger_to_csv(const Ledger& ledger) {
  std::string out = "node_id,sends\n";
  for (std::size_t i = 0; i < ledger.per_node.size(); ++i)
    out += std::to_string(i) + "," + std::to_string(ledger.per_node[i]) + "\n";
  return out;
}

std::string grid_to_csv(const std::vector<double>& grid, int r_bins) {
  std::string out;
  for (int row = 0; row < r_bins; ++row) {
    for (int col = 0; col < r_bins; ++col) {
      if (col > 0) out += ",";
      out += format_double(grid[static_cast<std::size_t>(row) * r_bins + col]);
    }
    out += "\n";
  }
  return out;
}

namespace {

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << contents;
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json row_to_json(const RunRow& r) {
  return {{"experiment", r.experiment},
          {"algorithm", r.algorithm},
          {"n", r.n},
          {"k", r.k},
          {"a", r.a},
          {"epsilon", r.epsilon},
          {"p", r.p},
          {"seed", r.seed},
          {"total_transmissions", r.total_transmissions},
          {"final_rel_error", r.final_rel_error},
          {"max_hops", r.max_hops},
          {"iterations", r.iterations},
          {"duration", r.duration},
          {"aborted", r.aborted}};
}

std::string summary_csv(const std::vector<RunRow>& rows) {
  struct Key {
    std::string algorithm;
    int n;
    int k;
    double p;
    bool operator<(const Key& o) const {
      return std::tie(algorithm, n, k, p) < std::tie(o.algorithm, o.n, o.k, o.p);
    }
  };
  struct Agg {
    std::vector<double> totals;
    double err_sum = 0.0;
    int max_hops = 0;
  };
  std::map<Key, Agg> groups;
  for (const auto& r : rows) {
    if (r.aborted) continue;
    auto& g = groups[Key{r.algorithm, r.n, r.k, r.p}];
    g.totals.push_back(static_cast<double>(r.total_transmissions));
    g.err_sum += r.final_rel_error;
    g.max_hops = std::max(g.max_hops, r.max_hops);
  }
  std::string out =
      "algorithm,n,k,p,runs,total_mean,total_std,total_min,total_max,rel_error_mean,max_hops\n";
  for (const auto& [key, agg] : groups) {
    const double count = static_cast<double>(agg.totals.size());
    const double mean = std::accumulate(agg.totals.begin(), agg.totals.end(), 0.0) / count;
    double var = 0.0;
    for (double t : agg.totals) var += (t - mean) * (t - mean);
    var /= count;
    const double mn = *std::min_element(agg.totals.begin(), agg.totals.end());
    const double mx = *std::max_element(agg.totals.begin(), agg.totals.end());
    out += key.algorithm + "," + std::to_string(key.n) + "," + std::to_string(key.k) + "," +
           format_double(key.p) + "," + std::to_string(agg.totals.size()) + "," +
           format_double(mean) + "," + format_double(std::sqrt(var)) + "," + format_double(mn) +
           "," + format_double(mx) + "," + format_double(agg.err_sum / count) + "," +
           std::to_string(agg.max_hops) + "\n";
  }
  return out;
}

}  // namespace

int write_outputs(const ExperimentResult& result) {
  const std::filesystem::path outdir = result.config.outdir;
  std::filesystem::create_directories(outdir);
  const std::string& name = result.config.experiment;

  write_atomic(outdir / (name + ".csv"), rows_to_csv(result.rows));
  write_atomic(outdir / (name + "_summary.csv"), summary_csv(result.rows));

  nlohmann::json mirror;
  mirror["config"] = result.config.to_json();
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows) rows.push_back(row_to_json(r));
  mirror["rows"] = std::move(rows);
  mirror["extras"] = result.extras;
  write_atomic(outdir / (name + ".json"), mirror.dump(2) + "\n");

  for (const auto& [alg, grid] : result.grids)
    write_atomic(outdir / (name + "_" + alg + "_grid.csv"),
                 grid_to_csv(grid, result.config.r_bins));
  for (const auto& [fname, contents] : result.files) write_atomic(outdir / fname, contents);

  return result.any_aborted ? 1 : 0;
}

}  // namespace msgossip::harness
