#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msgossip/gossip.hpp"
#include "msgossip/topology.hpp"

namespace msgossip {

// Comparison algorithms. Each iteration draws a uniform activating node and
// a uniform random target point in the unit square, then greedy-routes
// toward the target. Observers see every iteration (after updates).

// One path-averaging iteration as seen by observers: the activating node,
// the target draw, the routed path, how many nodes adopted the path average
// (a delivery-end suffix of the path under loss), and the charges.
struct PathIterationRecord {
  int source = 0;
  Point target_point;
  std::span<const int> path;
  int updated_nodes = 0;
  std::uint64_t transmissions_charged = 0;
};

struct PaNullObserver {
  void operator()(std::uint64_t /*iter*/, const PathIterationRecord&,
                  std::span<const double> /*x*/) {}
};

struct GeoNullObserver {
  void operator()(std::uint64_t /*iter*/, int /*s*/, int /*d*/, bool /*fwd*/, bool /*back*/,
                  std::span<const double> /*x*/) {}
};

// Path averaging: estimates are accumulated (sum, count) on the way to the
// delivery node, which computes the average of all |S| path values and sends
// it back down the same path; every path node adopts it. Cost 2*hops when
// reliable. A lossy forward-leg loss aborts the iteration with no updates; a
// return-leg loss updates only the nodes the return message already passed.
template <class Obs = PaNullObserver>
GossipRun path_averaging(const GeoGraph& g, std::vector<double> values, const StoppingRule& stop,
                         const FailureModel& transport, std::uint64_t seed,
                         const GossipLimits& limits = {}, Obs obs = {});

// Geographic gossip: the activating node pairwise-averages with the node
// greedy routing delivers at the random target location; only those two
// nodes update; cost 2*hops.
template <class Obs = GeoNullObserver>
GossipRun geographic_gossip(const GeoGraph& g, std::vector<double> values,
                            const StoppingRule& stop, const FailureModel& transport,
                            std::uint64_t seed, const GossipLimits& limits = {}, Obs obs = {});

namespace detail {

// Shared loop-tail bookkeeping for the baseline engines.
struct BaselineController {
  const StoppingRule& stop;
  const GossipLimits& limits;
  ConvergenceMonitor& mon;
  const Ledger& ledger;
  GossipResult& res;
  std::uint64_t start_total;
  double best_rss;
  std::uint64_t last_improvement_total;

  BaselineController(const StoppingRule& s, const GossipLimits& l, ConvergenceMonitor& m,
                     const Ledger& led, GossipResult& r)
      : stop(s), limits(l), mon(m), ledger(led), res(r), start_total(led.total),
        best_rss(m.rss()), last_improvement_total(led.total) {}

  bool oracle() const { return stop.kind == StoppingRule::Kind::kOracleEpsilon; }

  // true = stop the run
  bool after_iteration() {
    if (oracle() && mon.below(stop.epsilon)) {
      res.oracle_met = true;
      return true;
    }
    const std::uint64_t charged = ledger.total - start_total;
    if (charged >= limits.max_charged || res.iterations >= limits.max_charged) {
      res.hit_cap = true;
      return true;
    }
    if (limits.budget_total != 0 && ledger.total >= limits.budget_total) {
      res.budget_exhausted = true;
      return true;
    }
    if (limits.stagnation_window != 0) {
      if (mon.rss() <= best_rss * 0.9801) {
        best_rss = mon.rss();
        last_improvement_total = ledger.total;
      }
      if (ledger.total - last_improvement_total >= limits.stagnation_window) {
        res.stagnated = true;
        return true;
      }
    }
    return false;
  }

  void finalize() {
    res.transmissions = ledger.total - start_total;
    res.final_rel_error = mon.rel_error();
    res.best_rel_error = std::min(
        res.final_rel_error,
        mon.normsq0() > 0.0 ? std::sqrt(std::max(best_rss, 0.0) / mon.normsq0()) : 0.0);
  }
};

}  // namespace detail

template <class Obs>
GossipRun path_averaging(const GeoGraph& g, std::vector<double> values, const StoppingRule& stop,
                         const FailureModel& transport, std::uint64_t seed,
                         const GossipLimits& limits, Obs obs) {
  if (static_cast<int>(values.size()) != g.n)
    throw std::invalid_argument("path_averaging: value vector size mismatch");
  GossipRun run{std::move(values), Ledger(g.n), {}};
  auto& x = run.values;
  auto& ledger = run.ledger;
  GossipResult& res = run.result;

  Rng act(derive_seed(seed, {kSeedActivation}));
  Rng tx(derive_seed(seed, {kSeedTransport}));
  ConvergenceMonitor mon(x.data(), nullptr, static_cast<std::size_t>(g.n));
  detail::BaselineController ctl(stop, limits, mon, ledger, res);

  if (ctl.oracle() && mon.below(stop.epsilon)) {
    res.oracle_met = true;
    ctl.finalize();
    return run;
  }

  for (;;) {
    if (!ctl.oracle() && res.iterations >= stop.iterations) {
      res.completed_fixed = true;
      break;
    }
    const int s = static_cast<int>(act.uniform_int(static_cast<std::uint32_t>(g.n)));
    const Point target{act.uniform01(), act.uniform01()};
    const RoutePath route = greedy_route(g, s, target);
    const int h = route.hop_count();
    const std::uint64_t charged_before = ledger.total;
    int updated = 0;
    if (h > 0) {
      bool forward_ok = true;
      double sum = x[route.hops[0]];
      for (int i = 1; i <= h; ++i) {
        const int sender = route.hops[i - 1];
        if (transport.kind == FailureModel::Kind::kHandshake) {
          ledger.charge(sender, tx.geometric(transport.p));
        } else {
          ledger.charge(sender);
          if (transport.kind == FailureModel::Kind::kLossy && transport.p < 1.0 &&
              !tx.bernoulli(transport.p)) {
            forward_ok = false;
            break;
          }
        }
        sum += x[route.hops[i]];
      }
      if (forward_ok) {
        const double avg = sum / static_cast<double>(h + 1);
        mon.on_update(x[route.hops[h]], avg);
        x[route.hops[h]] = avg;
        ++updated;
        for (int i = h; i >= 1; --i) {
          const int sender = route.hops[i];
          bool delivered = true;
          if (transport.kind == FailureModel::Kind::kHandshake) {
            ledger.charge(sender, tx.geometric(transport.p));
          } else {
            ledger.charge(sender);
            if (transport.kind == FailureModel::Kind::kLossy && transport.p < 1.0)
              delivered = tx.bernoulli(transport.p);
          }
          if (!delivered) break;
          const int receiver = route.hops[i - 1];
          mon.on_update(x[receiver], avg);
          x[receiver] = avg;
          ++updated;
        }
      }
      ledger.note_route(h, -1, -1);
    }
    ++res.iterations;
    obs(res.iterations,
        PathIterationRecord{s, target, std::span<const int>(route.hops), updated,
                            ledger.total - charged_before},
        std::span<const double>(x));
    if (ctl.after_iteration()) break;
  }
  ctl.finalize();
  return run;
}

template <class Obs>
GossipRun geographic_gossip(const GeoGraph& g, std::vector<double> values,
                            const StoppingRule& stop, const FailureModel& transport,
                            std::uint64_t seed, const GossipLimits& limits, Obs obs) {
  if (static_cast<int>(values.size()) != g.n)
    throw std::invalid_argument("geographic_gossip: value vector size mismatch");
  GossipRun run{std::move(values), Ledger(g.n), {}};
  auto& x = run.values;
  auto& ledger = run.ledger;
  GossipResult& res = run.result;

  Rng act(derive_seed(seed, {kSeedActivation}));
  Rng tx(derive_seed(seed, {kSeedTransport}));
  ConvergenceMonitor mon(x.data(), nullptr, static_cast<std::size_t>(g.n));
  detail::BaselineController ctl(stop, limits, mon, ledger, res);

  if (ctl.oracle() && mon.below(stop.epsilon)) {
    res.oracle_met = true;
    ctl.finalize();
    return run;
  }

  for (;;) {
    if (!ctl.oracle() && res.iterations >= stop.iterations) {
      res.completed_fixed = true;
      break;
    }
    const int s = static_cast<int>(act.uniform_int(static_cast<std::uint32_t>(g.n)));
    const Point target{act.uniform01(), act.uniform01()};
    const RoutePath route = greedy_route(g, s, target);
    const int h = route.hop_count();
    if (h > 0) {
      const int d = route.delivery();
      const ExchangeOutcome ex = charge_exchange(route.hops, transport, tx, ledger);
      ledger.note_route(h, -1, -1);
      const double avg = 0.5 * (x[s] + x[d]);
      if (ex.delivered_forward) {
        mon.on_update(x[d], avg);
        x[d] = avg;
      }
      if (ex.delivered_back) {
        mon.on_update(x[s], avg);
        x[s] = avg;
      }
      ++res.iterations;
      obs(res.iterations, s, d, ex.delivered_forward, ex.delivered_back,
          std::span<const double>(x));
    } else {
      ++res.iterations;
      obs(res.iterations, s, s, false, false, std::span<const double>(x));
    }
    if (ctl.after_iteration()) break;
  }
  ctl.finalize();
  return run;
}

}  // namespace msgossip
