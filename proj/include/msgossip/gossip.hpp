#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "msgossip/kernels.hpp"
#include "msgossip/partition.hpp"
#include "msgossip/rng.hpp"
#include "msgossip/topology.hpp"

namespace msgossip {

struct StoppingRule {
  enum class Kind { kOracleEpsilon, kFixedIterations };
  Kind kind = Kind::kOracleEpsilon;
  double epsilon = 1e-4;
  std::uint64_t iterations = 0;

  static StoppingRule oracle(double eps) { return {Kind::kOracleEpsilon, eps, 0}; }
  static StoppingRule fixed(std::uint64_t t) { return {Kind::kFixedIterations, 0.0, t}; }
};

struct FailureModel {
  enum class Kind { kReliable, kHandshake, kLossy };
  Kind kind = Kind::kReliable;
  double p = 1.0;

  static FailureModel reliable() { return {Kind::kReliable, 1.0}; }
  static FailureModel handshake(double p) { return {Kind::kHandshake, p}; }
  static FailureModel lossy(double p) { return {Kind::kLossy, p}; }
};

// Every single-hop transmission is charged to its transmitting node,
// relays included. Spatial binning is derived on demand from the per-node
// counts since transmitter positions are fixed per graph.
struct Ledger {
  std::uint64_t total = 0;
  std::vector<std::uint64_t> per_node;
  int max_hops_seen = 0;
  std::uint64_t ceiling_violations = 0;         // gap-aware per-edge ceilings
  std::uint64_t strict_ceiling_violations = 0;  // literal sqrt(5) adjacent-cell form

  Ledger() = default;
  explicit Ledger(int n) : per_node(static_cast<std::size_t>(n), 0) {}

  void charge(int node, std::uint64_t k = 1) {
    per_node[static_cast<std::size_t>(node)] += k;
    total += k;
  }
  void note_route(int hop_count, int ceiling, int strict_ceiling) {
    if (hop_count > max_hops_seen) max_hops_seen = hop_count;
    if (ceiling >= 0 && hop_count > ceiling) ++ceiling_violations;
    if (strict_ceiling >= 0 && hop_count > strict_ceiling) ++strict_ceiling_violations;
  }
};

// R x R row-major grid of transmission mass binned at transmitter locations,
// normalized to sum 1 (all-zero if nothing was charged).
std::vector<double> spatial_grid(const Ledger& ledger, const GeoGraph& g, int r_bins);

struct ExchangeOutcome {
  bool delivered_forward = true;
  bool delivered_back = true;
  std::uint64_t transmissions = 0;
};

// Charges one logical exchange over a route (value out, averaged value back;
// 2h single-hop transmissions when reliable). Handshake retransmits per hop
// with Geometric(p) cost and always delivers. Lossy drops the message at the
// first failed hop: a forward-leg loss updates nobody, a return-leg loss
// leaves only the responder updated.
ExchangeOutcome charge_exchange(std::span<const int> hops, const FailureModel& transport,
                                Rng& tx, Ledger& ledger);

// Per-invocation accuracy for final accuracy delta: epsilon = delta / (k n).
double calibrate_epsilon(double delta, int n, int k);

// Tracks ||x - mean0*1|| / ||x(0)|| over a participant set. Updates are O(1)
// incremental; any reported convergence is confirmed by an exact
// recomputation, and the running sum is refreshed periodically to bound
// float drift.
class ConvergenceMonitor {
 public:
  ConvergenceMonitor(const double* x, const std::vector<int>* ids, std::size_t p);

  double mean0() const { return mean0_; }
  double normsq0() const { return normsq0_; }
  double rss() const { return rss_; }

  void on_update(double oldv, double newv) {
    const double dn = newv - mean0_;
    const double dp = oldv - mean0_;
    rss_ += dn * dn - dp * dp;
    if (++updates_since_refresh_ >= kRefreshEvery) refresh();
  }

  // Exact-on-trigger test of sqrt(rss)/||x(0)|| <= eps.
  bool below(double eps) {
    const double thresh = eps * eps * normsq0_;
    if (rss_ > thresh) return false;
    refresh();
    return rss_ <= thresh;
  }

  double rel_error() {
    refresh();
    if (normsq0_ > 0.0) return std::sqrt(std::max(rss_, 0.0) / normsq0_);
    return rss_ > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }

  void refresh();

 private:
  static constexpr std::uint64_t kRefreshEvery = 4096;
  const double* x_;
  const std::vector<int>* ids_;  // nullptr: participants are x[0..p)
  std::size_t p_;
  double mean0_ = 0.0, normsq0_ = 0.0, rss_ = 0.0;
  std::uint64_t updates_since_refresh_ = 0;
};

struct GossipLimits {
  std::uint64_t max_charged = 1'000'000'000ULL;  // per-invocation transmission cap
  std::uint64_t budget_total = 0;                // absolute ledger.total limit, 0 = none
  std::uint64_t stagnation_window = 0;           // charged since last improvement, 0 = off
};

struct GossipResult {
  std::uint64_t iterations = 0;
  std::uint64_t transmissions = 0;
  bool oracle_met = false;
  bool completed_fixed = false;
  bool hit_cap = false;
  bool budget_exhausted = false;
  bool stagnated = false;
  double final_rel_error = 0.0;
  double best_rel_error = 0.0;

  bool converged() const { return oracle_met || completed_fixed; }
};

struct RouteSpec {
  const int* hops = nullptr;  // global node ids, source first
  int count = 0;              // number of nodes
  int ceiling = -1;           // gap-aware hop ceiling, -1 = unchecked
  int strict_ceiling = -1;
};

using RouteScratch = std::array<int, 2>;

// Participant views. Each exposes locals 0..size()-1 mapped to global node
// ids, neighbor access, and the route realizing one logical edge.

class WholeGraphView {
 public:
  explicit WholeGraphView(const GeoGraph& g) : g_(&g) {}
  int size() const { return g_->n; }
  int global_id(int i) const { return i; }
  int degree(int i) const { return static_cast<int>(g_->adj[i].size()); }
  int neighbor(int i, int j) const { return g_->adj[i][j]; }
  RouteSpec route(int u, int j, RouteScratch& scratch) const {
    scratch = {u, g_->adj[u][j]};
    return {scratch.data(), 2, -1, -1};
  }
  const std::vector<int>* participant_ids() const { return nullptr; }

 private:
  const GeoGraph* g_;
};

// Induced subgraph over a member list. `scratch_map` must be a vector of
// size g.n filled with -1; it is used during construction and restored.
class SubgraphView {
 public:
  SubgraphView(const GeoGraph& g, const std::vector<int>& members,
               std::vector<int>& scratch_map);
  int size() const { return static_cast<int>(globals_.size()); }
  int global_id(int i) const { return globals_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }
  int neighbor(int i, int j) const { return adj_[i][j]; }
  RouteSpec route(int u, int j, RouteScratch& scratch) const {
    scratch = {globals_[u], globals_[adj_[u][j]]};
    return {scratch.data(), 2, -1, -1};
  }
  const std::vector<int>* participant_ids() const { return &globals_; }

 private:
  std::vector<int> globals_;
  std::vector<std::vector<int>> adj_;
};

// Representatives gossiping over an overlay grid; logical edges are realized
// by the stored multi-hop routes (the activating side's route, retraced for
// the reply).
class OverlayView {
 public:
  explicit OverlayView(const OverlayGrid& o) : o_(&o) {}
  int size() const { return o_->size(); }
  int global_id(int i) const { return o_->reps[i]; }
  int degree(int i) const { return static_cast<int>(o_->adj[i].size()); }
  int neighbor(int i, int j) const { return o_->adj[i][j].first; }
  RouteSpec route(int u, int j, RouteScratch&) const {
    const auto [v, e] = o_->adj[u][j];
    const OverlayEdge& edge = o_->edges[e];
    const RoutePath& r = (edge.u == u) ? edge.forward : edge.reverse;
    return {r.hops.data(), static_cast<int>(r.hops.size()), edge.hop_ceiling,
            edge.strict_hop_ceiling};
  }
  const std::vector<int>* participant_ids() const { return &o_->reps; }

 private:
  const OverlayGrid* o_;
};

// Connected components of the induced subgraph on `members`; `scratch_map`
// as for SubgraphView.
std::vector<std::vector<int>> induced_components(const GeoGraph& g,
                                                 const std::vector<int>& members,
                                                 std::vector<int>& scratch_map);

struct NullObserver {
  void operator()(std::uint64_t, int, int, bool, bool) {}
};

// Asynchronous randomized pairwise gossip: each iteration activates a
// uniform participant and a uniform neighbor, both replace their values by
// the pairwise average (transport permitting). Stops on the oracle error
// monitor or after a fixed iteration count. The observer sees every
// iteration after its updates have been applied.
template <class View, class Obs = NullObserver>
GossipResult run_gossip(const View& view, std::span<double> x, const StoppingRule& stop,
                        const FailureModel& transport, Ledger& ledger, Rng& act, Rng& tx,
                        const GossipLimits& limits = {}, Obs obs = {}) {
  GossipResult res;
  const int p = view.size();
  if (p == 0) return res;
  const std::uint64_t start_total = ledger.total;

  ConvergenceMonitor mon(x.data(), view.participant_ids(), static_cast<std::size_t>(p));
  double best_rss = mon.rss();
  std::uint64_t last_improvement_total = ledger.total;

  const bool oracle = stop.kind == StoppingRule::Kind::kOracleEpsilon;
  if (oracle && mon.below(stop.epsilon)) {
    res.oracle_met = true;
    res.final_rel_error = res.best_rel_error = mon.rel_error();
    return res;
  }

  for (;;) {
    if (!oracle && res.iterations >= stop.iterations) {
      res.completed_fixed = true;
      break;
    }
    const int u = act.uniform_int(static_cast<std::uint32_t>(p));
    const int deg = view.degree(u);
    if (deg > 0) {
      const int j = static_cast<int>(act.uniform_int(static_cast<std::uint32_t>(deg)));
      const int v = view.neighbor(u, j);
      RouteScratch scratch;
      const RouteSpec route = view.route(u, j, scratch);
      const int gu = view.global_id(u);
      const int gv = view.global_id(v);
      const ExchangeOutcome ex =
          charge_exchange({route.hops, static_cast<std::size_t>(route.count)}, transport, tx,
                          ledger);
      ledger.note_route(route.count - 1, route.ceiling, route.strict_ceiling);
      const double avg = 0.5 * (x[gu] + x[gv]);
      if (ex.delivered_forward) {
        mon.on_update(x[gv], avg);
        x[gv] = avg;
      }
      if (ex.delivered_back) {
        mon.on_update(x[gu], avg);
        x[gu] = avg;
      }
      ++res.iterations;
      obs(res.iterations, gu, gv, ex.delivered_forward, ex.delivered_back);
    } else {
      ++res.iterations;
      obs(res.iterations, -1, -1, false, false);
    }

    if (oracle && mon.below(stop.epsilon)) {
      res.oracle_met = true;
      break;
    }
    const std::uint64_t charged = ledger.total - start_total;
    if (charged >= limits.max_charged || res.iterations >= limits.max_charged) {
      res.hit_cap = true;
      break;
    }
    if (limits.budget_total != 0 && ledger.total >= limits.budget_total) {
      res.budget_exhausted = true;
      break;
    }
    if (limits.stagnation_window != 0) {
      if (mon.rss() <= best_rss * 0.9801) {  // >= 1% relative-error improvement
        best_rss = mon.rss();
        last_improvement_total = ledger.total;
      }
      if (ledger.total - last_improvement_total >= limits.stagnation_window) {
        res.stagnated = true;
        break;
      }
    }
  }

  res.transmissions = ledger.total - start_total;
  res.final_rel_error = mon.rel_error();
  res.best_rel_error = std::min(
      res.final_rel_error,
      mon.normsq0() > 0.0 ? std::sqrt(std::max(best_rss, 0.0) / mon.normsq0()) : 0.0);
  return res;
}

struct GossipRun {
  std::vector<double> values;
  Ledger ledger;
  GossipResult result;
};

// Whole-graph randomized gossip (the k=1 degenerate hierarchy and the unit
// of everything larger).
GossipRun randomized_gossip(const GeoGraph& g, std::vector<double> values,
                            const StoppingRule& stop, const FailureModel& transport,
                            std::uint64_t seed, const GossipLimits& limits = {});

}  // namespace msgossip
