#include "msgossip/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msgossip {

std::uint64_t fixed_iterations_for(double level_graph_size, double epsilon, double c_fi) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("fixed_iterations_for: epsilon must be > 0");
  if (level_graph_size < 1.0)
    throw std::invalid_argument("fixed_iterations_for: graph size must be >= 1");
  if (level_graph_size <= 1.0) return 0;
  const double t = c_fi * level_graph_size * level_graph_size * std::log(1.0 / epsilon);
  return t > 0.0 ? static_cast<std::uint64_t>(std::ceil(t)) : 0;
}

namespace {

struct ProbeAdapter {
  InvocationProbe* probe;
  std::span<const double> x;
  std::span<const int> ids;
  void operator()(std::uint64_t, int, int, bool, bool) { probe->after_iteration(ids, x); }
};

struct RunState {
  const GeoGraph& g;
  const MultiscaleConfig& cfg;
  std::uint64_t seed;
  MultiscaleOutcome& out;
  std::span<double> x;
  std::vector<int> scratch;
  bool stop_run = false;  // budget exhausted: stop charging further work

  RunState(const GeoGraph& graph, const MultiscaleConfig& config, std::uint64_t s,
           MultiscaleOutcome& o, std::span<double> values)
      : g(graph), cfg(config), seed(s), out(o), x(values), scratch(graph.n, -1) {}

  template <class View>
  GossipResult invoke(const View& view, const StoppingRule& stop, int level, int cell,
                      int part) {
    Rng act(derive_seed(seed, {kSeedActivation, static_cast<std::uint64_t>(level),
                               static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(part)}));
    Rng tx(derive_seed(seed, {kSeedTransport, static_cast<std::uint64_t>(level),
                              static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(part)}));
    GossipResult r;
    if (cfg.probe != nullptr) {
      cfg.probe->begin(*view.participant_ids(), x);
      r = run_gossip(view, x, stop, cfg.transport, out.ledger, act, tx, cfg.limits,
                     ProbeAdapter{cfg.probe, x, *view.participant_ids()});
      cfg.probe->end(r);
    } else {
      r = run_gossip(view, x, stop, cfg.transport, out.ledger, act, tx, cfg.limits);
    }
    ++out.g_used;
    out.iterations += r.iterations;
    if (r.final_rel_error <= cfg.epsilon) ++out.invocations_meeting_eps;
    out.cap_hit |= r.hit_cap;
    if (r.budget_exhausted) {
      out.budget_exhausted = true;
      stop_run = true;
    }
    return r;
  }

  void count_trivial_invocation(LevelStats& ls) {
    ++out.g_used;
    ++out.invocations_meeting_eps;
    ++ls.invocations;
  }
};

}  // namespace

MultiscaleOutcome multiscale_gossip(const GeoGraph& g, std::vector<double> values,
                                    const MultiscaleConfig& cfg, std::uint64_t seed) {
  if (static_cast<int>(values.size()) != g.n)
    throw std::invalid_argument("multiscale_gossip: value vector size mismatch");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("multiscale_gossip: epsilon must be > 0");

  const std::vector<double> x0 = values;
  MultiscaleOutcome out;
  out.ledger = Ledger(g.n);
  out.rep_counts.assign(g.n, 0);
  out.a_used = cfg.a;

  int k = cfg.k;
  if (k <= 0) {
    const AutoLevels al = auto_levels(g.n, cfg.a, cfg.auto_m, cfg.auto_M);
    k = al.k;
    out.auto_flagged = !al.within_bounds;
  }
  // Drop degenerate trailing levels (side 1 never splits further): they add
  // no cells, re-run the same gossip one level deeper, and turn the
  // reweighting into a no-op. Once a side rounds to 1 every deeper side does
  // too, so the clamp saturates the hierarchy.
  {
    const Hierarchy probe = build_hierarchy(g.n, k, cfg.a);
    while (k > 1 && probe.side[k] == 1) --k;
  }
  out.k_used = k;

  const Hierarchy h = build_hierarchy(g.n, k, cfg.a);
  CellTree tree = assign_cells(g, h);
  RunState st(g, cfg, seed, out, std::span<double>(values));

  const bool oracle = cfg.stopping == MultiscaleConfig::Stopping::kOracle;

  // Level k: randomized gossip on the induced subgraph of every nonempty
  // finest cell. Disconnected cells are flagged and gossiped per component.
  {
    LevelStats ls;
    ls.level = k;
    const std::uint64_t start = out.ledger.total;
    const StoppingRule stop =
        oracle ? StoppingRule::oracle(cfg.epsilon)
               : StoppingRule::fixed(fixed_iterations_for(
                     std::max(1.0, h.expected_cell_nodes[k]), cfg.epsilon, cfg.c_fi));
    const auto& cells = tree.levels[k];
    for (int flat = 0; flat < static_cast<int>(cells.size()) && !st.stop_run; ++flat) {
      const Cell& cell = cells[flat];
      if (cell.empty()) continue;
      if (cell.members.size() == 1) {
        st.count_trivial_invocation(ls);
        continue;
      }
      const auto comps = induced_components(g, cell.members, st.scratch);
      if (comps.size() > 1) ++out.disconnected_cells;
      for (int ci = 0; ci < static_cast<int>(comps.size()) && !st.stop_run; ++ci) {
        if (comps[ci].size() == 1) {
          st.count_trivial_invocation(ls);
          continue;
        }
        SubgraphView view(g, comps[ci], st.scratch);
        const GossipResult r = st.invoke(view, stop, k, flat, ci);
        ls.makespan = std::max(ls.makespan, r.iterations);
        ls.iterations += r.iterations;
        ++ls.invocations;
      }
    }
    ls.transmissions = out.ledger.total - start;
    out.per_level.push_back(ls);
    out.makespan += ls.makespan;
  }

  // Elect level-k representatives among cell members.
  for (int flat = 0; flat < static_cast<int>(tree.levels[k].size()); ++flat) {
    Cell& cell = tree.levels[k][flat];
    if (cell.empty()) continue;
    Rng erng(derive_seed(seed, {kSeedElection, static_cast<std::uint64_t>(k),
                                static_cast<std::uint64_t>(flat)}));
    cell.representative = elect_representative(cell, g, cfg.rep_policy, &erng);
    ++out.rep_counts[cell.representative];
  }

  // Up-pass: overlay-grid gossip at levels k-1 .. 1. Population reweighting is
  // applied to the level-k representatives (and at every level when
  // configured); the cell's next representative is elected among the overlay
  // vertices, which are the nodes holding the converged value.
  for (int j = k - 1; j >= 1 && !st.stop_run; --j) {
    LevelStats ls;
    ls.level = j;
    const std::uint64_t start = out.ledger.total;

    if (j == k - 1 || cfg.reweight_mode == MultiscaleConfig::ReweightMode::kEveryLevel) {
      for (int flat = 0; flat < static_cast<int>(tree.levels[j].size()); ++flat) {
        const Cell& parent = tree.levels[j][flat];
        if (parent.empty()) continue;
        const auto children = tree.child_indices(j, flat);
        long long nonempty = 0;
        for (int cc : children)
          if (!tree.at(j + 1, cc).empty()) ++nonempty;
        for (int cc : children) {
          const Cell& child = tree.at(j + 1, cc);
          if (child.empty()) continue;
          const ReweightFactor f{static_cast<long long>(child.members.size()), nonempty,
                                 static_cast<long long>(parent.members.size())};
          st.x[child.representative] = reweight(st.x[child.representative], f);
        }
      }
    }

    const StoppingRule stop =
        oracle ? StoppingRule::oracle(cfg.epsilon)
               : StoppingRule::fixed(fixed_iterations_for(
                     static_cast<double>(h.side[j + 1]) * h.side[j + 1], cfg.epsilon, cfg.c_fi));
    for (int flat = 0; flat < static_cast<int>(tree.levels[j].size()) && !st.stop_run; ++flat) {
      Cell& parent = tree.levels[j][flat];
      if (parent.empty()) continue;
      const OverlayGrid grid = build_overlay(tree, j, flat, g);
      out.misrouted_edges += grid.misrouted;
      out.overlay_repairs += grid.repair_links;
      if (grid.size() >= 2) {
        OverlayView view(grid);
        const GossipResult r = st.invoke(view, stop, j, flat, 0);
        ls.makespan = std::max(ls.makespan, r.iterations);
        ls.iterations += r.iterations;
        ++ls.invocations;
      } else {
        st.count_trivial_invocation(ls);
      }
      if (j >= 2) {
        Rng erng(derive_seed(seed, {kSeedElection, static_cast<std::uint64_t>(j),
                                    static_cast<std::uint64_t>(flat)}));
        parent.representative = elect_among(grid.reps, g, parent.center(), cfg.rep_policy, &erng);
        ++out.rep_counts[parent.representative];
      }
    }

    ls.transmissions = out.ledger.total - start;
    out.per_level.push_back(ls);
    out.makespan += ls.makespan;
  }

  if (!st.stop_run) {
    out.dissemination_transmissions =
        disseminate(tree, g, st.x, out.ledger, &out.unreachable_nodes);
  }

  out.final_values = std::move(values);
  const auto& kr = kernels::ops();
  const std::size_t n = static_cast<std::size_t>(g.n);
  const double mean0 = kr.sum(x0.data(), n) / static_cast<double>(g.n);
  const double normsq0 = kr.sum_sq_dev(x0.data(), n, 0.0);
  const double rss = kr.sum_sq_dev(out.final_values.data(), n, mean0);
  out.final_rel_error = normsq0 > 0.0 ? std::sqrt(rss / normsq0) : (rss > 0.0 ? INFINITY : 0.0);
  return out;
}

MultiscaleOutcome two_level_gossip(const GeoGraph& g, std::vector<double> values, double epsilon,
                                   const FailureModel& transport, std::uint64_t seed,
                                   const GossipLimits& limits) {
  MultiscaleConfig cfg;
  cfg.k = 2;
  cfg.a = 0.5;
  cfg.epsilon = epsilon;
  cfg.transport = transport;
  cfg.limits = limits;
  return multiscale_gossip(g, std::move(values), cfg, seed);
}

namespace {

void push_down(const CellTree& tree, const GeoGraph& g, std::span<double> x, Ledger& ledger,
               int level, int flat, int holder, double value, int* unreachable) {
  if (level == tree.h.k) {
    // Spanning-tree flood within the finest cell, one transmission per tree
    // edge, sender charged.
    const auto& members = tree.at(level, flat).members;  // ascending node ids
    const auto local_of = [&](int node) {
      const auto it = std::lower_bound(members.begin(), members.end(), node);
      return (it != members.end() && *it == node) ? static_cast<int>(it - members.begin()) : -1;
    };
    std::vector<char> reached(members.size(), 0);
    std::vector<int> queue;
    reached[local_of(holder)] = 1;
    queue.push_back(holder);
    std::size_t head = 0;
    std::size_t count = 1;
    while (head < queue.size()) {
      const int u = queue[head++];
      for (int v : g.adj[u]) {
        const int lv = local_of(v);
        if (lv < 0 || reached[lv]) continue;
        reached[lv] = 1;
        ++count;
        ledger.charge(u);
        x[v] = value;
        queue.push_back(v);
      }
    }
    x[holder] = value;
    if (count < members.size()) {
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (!reached[i]) {
          x[members[i]] = value;
          if (unreachable != nullptr) ++*unreachable;
        }
      }
    }
    return;
  }

  const int ceiling = hop_ceiling(2.0, tree.h.grid_side[level], g.radius);
  for (int cc : tree.child_indices(level, flat)) {
    const Cell& child = tree.at(level + 1, cc);
    if (child.empty()) continue;
    const int rep = child.representative;
    if (rep != holder) {
      const RoutePath route = greedy_route(g, holder, g.coord(rep));
      for (int i = 0; i + 1 < static_cast<int>(route.hops.size()); ++i)
        ledger.charge(route.hops[i]);
      ledger.note_route(route.hop_count(), ceiling, ceiling);
      x[rep] = value;
    }
    push_down(tree, g, x, ledger, level + 1, cc, rep, value, unreachable);
  }
}

}  // namespace

std::uint64_t disseminate(const CellTree& tree, const GeoGraph& g, std::span<double> x,
                          Ledger& ledger, int* unreachable) {
  const std::uint64_t start = ledger.total;
  const int top = std::min(2, tree.h.k);
  const auto& cells = tree.levels[top];
  for (int flat = 0; flat < static_cast<int>(cells.size()); ++flat) {
    const Cell& cell = cells[flat];
    if (cell.empty()) continue;
    if (cell.representative < 0)
      throw std::logic_error("disseminate: representative not set");
    push_down(tree, g, x, ledger, top, flat, cell.representative, x[cell.representative],
              unreachable);
  }
  return ledger.total - start;
}

nlohmann::json run_record(const MultiscaleConfig& cfg, std::uint64_t seed,
                          const MultiscaleOutcome& out) {
  nlohmann::json per_level = nlohmann::json::object();
  for (const auto& ls : out.per_level)
    per_level[std::to_string(ls.level)] = ls.transmissions;
  return {
      {"config",
       {{"k", out.k_used},
        {"a", out.a_used},
        {"epsilon", cfg.epsilon},
        {"stopping",
         cfg.stopping == MultiscaleConfig::Stopping::kOracle ? "oracle" : "fixed_iterations"},
        {"c_fi", cfg.c_fi},
        {"rep_policy", cfg.rep_policy == RepPolicy::kCenterClosest ? "center" : "random"},
        {"reweight_mode",
         cfg.reweight_mode == MultiscaleConfig::ReweightMode::kLevelKOnly ? "level_k_only"
                                                                          : "every_level"},
        {"transport", cfg.transport.kind == FailureModel::Kind::kReliable    ? "reliable"
                      : cfg.transport.kind == FailureModel::Kind::kHandshake ? "handshake"
                                                                             : "lossy"},
        {"p", cfg.transport.p}}},
      {"seed", seed},
      {"per_level_transmissions", per_level},
      {"dissemination_transmissions", out.dissemination_transmissions},
      {"g_used", out.g_used},
      {"final_rel_error", out.final_rel_error},
      {"max_hops_seen", out.ledger.max_hops_seen},
      {"total", out.ledger.total},
      {"iterations", out.iterations},
      {"makespan", out.makespan},
      {"disconnected_cells", out.disconnected_cells},
      {"misrouted_edges", out.misrouted_edges},
      {"overlay_repairs", out.overlay_repairs},
      {"budget_exhausted", out.budget_exhausted},
      {"cap_hit", out.cap_hit},
  };
}

}  // namespace msgossip
