#include "msgossip/gossip.hpp"

#include <algorithm>
#include <stdexcept>

namespace msgossip {

std::vector<double> spatial_grid(const Ledger& ledger, const GeoGraph& g, int r_bins) {
  if (r_bins < 1) throw std::invalid_argument("spatial_grid: r_bins must be positive");
  std::vector<double> grid(static_cast<std::size_t>(r_bins) * r_bins, 0.0);
  const auto bin = [&](double v) {
    return std::min(static_cast<int>(v * r_bins), r_bins - 1);
  };
  for (int i = 0; i < g.n; ++i) {
    if (ledger.per_node[i] == 0) continue;
    grid[static_cast<std::size_t>(bin(g.ys[i])) * r_bins + bin(g.xs[i])] +=
        static_cast<double>(ledger.per_node[i]);
  }
  if (ledger.total > 0) {
    const double inv = 1.0 / static_cast<double>(ledger.total);
    for (double& v : grid) v *= inv;
  }
  return grid;
}

ExchangeOutcome charge_exchange(std::span<const int> hops, const FailureModel& transport,
                                Rng& tx, Ledger& ledger) {
  ExchangeOutcome out;
  const int h = static_cast<int>(hops.size()) - 1;
  if (h <= 0) return out;

  switch (transport.kind) {
    case FailureModel::Kind::kHandshake: {
      for (int i = 0; i < h; ++i) {
        const std::uint64_t k = tx.geometric(transport.p);
        ledger.charge(hops[i], k);
        out.transmissions += k;
      }
      for (int i = h; i >= 1; --i) {
        const std::uint64_t k = tx.geometric(transport.p);
        ledger.charge(hops[i], k);
        out.transmissions += k;
      }
      return out;
    }
    case FailureModel::Kind::kLossy: {
      if (transport.p >= 1.0) break;  // identical to reliable, consumes no draws
      for (int i = 0; i < h; ++i) {
        ledger.charge(hops[i]);
        ++out.transmissions;
        if (!tx.bernoulli(transport.p)) {
          out.delivered_forward = out.delivered_back = false;
          return out;
        }
      }
      for (int i = h; i >= 1; --i) {
        ledger.charge(hops[i]);
        ++out.transmissions;
        if (!tx.bernoulli(transport.p)) {
          out.delivered_back = false;
          return out;
        }
      }
      return out;
    }
    case FailureModel::Kind::kReliable:
      break;
  }

  for (int i = 0; i < h; ++i) ledger.charge(hops[i]);
  for (int i = h; i >= 1; --i) ledger.charge(hops[i]);
  out.transmissions = 2 * static_cast<std::uint64_t>(h);
  return out;
}

double calibrate_epsilon(double delta, int n, int k) {
  if (delta <= 0.0) throw std::invalid_argument("calibrate_epsilon: delta must be positive");
  if (n < 1 || k < 1) throw std::invalid_argument("calibrate_epsilon: n, k must be positive");
  return delta / (static_cast<double>(k) * static_cast<double>(n));
}

ConvergenceMonitor::ConvergenceMonitor(const double* x, const std::vector<int>* ids,
                                       std::size_t p)
    : x_(x), ids_(ids), p_(p) {
  const auto& k = kernels::ops();
  if (ids_ == nullptr) {
    mean0_ = p_ > 0 ? k.sum(x_, p_) / static_cast<double>(p_) : 0.0;
    normsq0_ = k.sum_sq_dev(x_, p_, 0.0);
  } else {
    double sum = 0.0, nsq = 0.0;
    for (int id : *ids_) {
      sum += x_[id];
      nsq += x_[id] * x_[id];
    }
    mean0_ = p_ > 0 ? sum / static_cast<double>(p_) : 0.0;
    normsq0_ = nsq;
  }
  refresh();
}

void ConvergenceMonitor::refresh() {
  if (ids_ == nullptr) {
    rss_ = kernels::ops().sum_sq_dev(x_, p_, mean0_);
  } else {
    double acc = 0.0;
    for (int id : *ids_) {
      const double d = x_[id] - mean0_;
      acc += d * d;
    }
    rss_ = acc;
  }
  updates_since_refresh_ = 0;
}

SubgraphView::SubgraphView(const GeoGraph& g, const std::vector<int>& members,
                           std::vector<int>& scratch_map) {
  globals_ = members;
  adj_.resize(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) scratch_map[members[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (int nb : g.adj[members[i]]) {
      const int local = scratch_map[nb];
      if (local >= 0) adj_[i].push_back(local);
    }
  }
  for (int m : members) scratch_map[m] = -1;
}

std::vector<std::vector<int>> induced_components(const GeoGraph& g,
                                                 const std::vector<int>& members,
                                                 std::vector<int>& scratch_map) {
  for (int m : members) scratch_map[m] = 0;  // 0 = unvisited member
  std::vector<std::vector<int>> comps;
  std::vector<int> stack;
  for (int m : members) {
    if (scratch_map[m] != 0) continue;
    comps.emplace_back();
    auto& comp = comps.back();
    scratch_map[m] = 1;
    stack.push_back(m);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (int v : g.adj[u]) {
        if (scratch_map[v] == 0) {
          scratch_map[v] = 1;
          stack.push_back(v);
        }
      }
    }
  }
  for (int m : members) scratch_map[m] = -1;
  return comps;
}

GossipRun randomized_gossip(const GeoGraph& g, std::vector<double> values,
                            const StoppingRule& stop, const FailureModel& transport,
                            std::uint64_t seed, const GossipLimits& limits) {
  if (static_cast<int>(values.size()) != g.n)
    throw std::invalid_argument("randomized_gossip: value vector size mismatch");
  GossipRun run{std::move(values), Ledger(g.n), {}};
  Rng act(derive_seed(seed, {kSeedActivation}));
  Rng tx(derive_seed(seed, {kSeedTransport}));
  WholeGraphView view(g);
  run.result = run_gossip(view, std::span<double>(run.values), stop, transport, run.ledger,
                          act, tx, limits);
  return run;
}

}  // namespace msgossip
