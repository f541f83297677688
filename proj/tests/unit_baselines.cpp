#include <cmath>
#include <numeric>

#include "doctest.h"
#include "msgossip/baselines.hpp"
#include "msgossip/harness.hpp"

using namespace msgossip;

TEST_CASE("path averaging: all-equal values converge in zero iterations") {
  const GeoGraph g = generate_rgg_connected(60, 3.0, 1);
  const auto run = path_averaging(g, std::vector<double>(60, 2.5), StoppingRule::oracle(1e-4),
                                  FailureModel::reliable(), 9);
  CHECK(run.result.iterations == 0);
  CHECK(run.ledger.total == 0);
}

TEST_CASE("path averaging over a full 3-node chain: one iteration, 4 transmissions") {
  // Collinear chain; any iteration routing end to end covers all three nodes.
  const GeoGraph g = graph_from_points({{0.10, 0.5}, {0.15, 0.5}, {0.20, 0.5}}, 0.06);
  bool saw_full_path = false;
  for (std::uint64_t seed = 0; seed < 64 && !saw_full_path; ++seed) {
    std::vector<std::uint64_t> lens;
    std::vector<int> updates;
    auto obs = [&](std::uint64_t, const PathIterationRecord& rec, std::span<const double>) {
      lens.push_back(rec.path.size());
      updates.push_back(rec.updated_nodes);
    };
    const auto run = path_averaging(g, {0.0, 3.0, 6.0}, StoppingRule::fixed(1),
                                    FailureModel::reliable(), seed, GossipLimits{}, obs);
    REQUIRE(lens.size() == 1);
    if (lens[0] == 3) {
      saw_full_path = true;
      CHECK(updates[0] == 3);
      CHECK(run.ledger.total == 4);  // 2 hops out, 2 hops back
      CHECK(run.values[0] == doctest::Approx(3.0));
      CHECK(run.values[1] == doctest::Approx(3.0));
      CHECK(run.values[2] == doctest::Approx(3.0));
    }
  }
  CHECK(saw_full_path);
}

TEST_CASE("path averaging conserves the global sum under reliable transport") {
  const GeoGraph g = generate_rgg_connected(150, 3.0, 33);
  const auto init = harness::initial_values(150, "uniform", 5);
  const double sum0 = std::accumulate(init.begin(), init.end(), 0.0);
  const auto run = path_averaging(g, init, StoppingRule::oracle(1e-4),
                                  FailureModel::reliable(), 21);
  const double sum = std::accumulate(run.values.begin(), run.values.end(), 0.0);
  CHECK(std::abs(sum - sum0) / std::abs(sum0) <= 1e-12);
  CHECK(run.result.oracle_met);
}

TEST_CASE("path averaging updates exactly the routed path under reliable transport") {
  const GeoGraph g = generate_rgg_connected(120, 3.0, 3);
  const auto init = harness::initial_values(120, "uniform", 6);
  auto obs = [&](std::uint64_t, const PathIterationRecord& rec, std::span<const double>) {
    if (rec.path.size() > 1) {
      CHECK(rec.updated_nodes == static_cast<int>(rec.path.size()));
      CHECK(rec.transmissions_charged == 2 * (rec.path.size() - 1));
      CHECK(rec.source == rec.path[0]);
    } else {
      CHECK(rec.updated_nodes == 0);
      CHECK(rec.transmissions_charged == 0);
    }
  };
  path_averaging(g, init, StoppingRule::fixed(500), FailureModel::reliable(), 77,
                 GossipLimits{}, obs);
}

TEST_CASE("geographic gossip: degenerate target, two-node pair, update-set size") {
  SUBCASE("zero-hop route performs no update and charges nothing") {
    const GeoGraph g = graph_from_points({{0.2, 0.2}, {0.8, 0.8}}, 0.05);  // isolated pair
    const auto run = geographic_gossip(g, {1.0, 5.0}, StoppingRule::fixed(50),
                                       FailureModel::reliable(), 8);
    CHECK(run.ledger.total == 0);
    CHECK(run.values == std::vector<double>{1.0, 5.0});
  }
  SUBCASE("two connected nodes meet at the average") {
    const GeoGraph g = graph_from_points({{0.45, 0.5}, {0.55, 0.5}}, 0.2);
    const auto run = geographic_gossip(g, {0.0, 2.0}, StoppingRule::oracle(1e-9),
                                       FailureModel::reliable(), 14);
    CHECK(run.values[0] == doctest::Approx(1.0));
    CHECK(run.values[1] == doctest::Approx(1.0));
  }
  SUBCASE("at most two nodes change per iteration") {
    // deterministic replays: the t-iteration run is a prefix of the (t+1)-run
    const GeoGraph g = generate_rgg_connected(100, 3.0, 42);
    const auto init = harness::initial_values(100, "uniform", 4);
    std::vector<double> prev = init;
    int worst = 0;
    for (std::uint64_t t = 1; t <= 40; ++t) {
      const auto run = geographic_gossip(g, init, StoppingRule::fixed(t),
                                         FailureModel::reliable(), 5);
      int changed = 0;
      for (int i = 0; i < 100; ++i)
        if (run.values[i] != prev[i]) ++changed;
      worst = std::max(worst, changed);
      prev = run.values;
    }
    CHECK(worst <= 2);
  }
}

TEST_CASE("geographic gossip needs more transmissions than path averaging (n=500)") {
  double geo_total = 0.0, pa_total = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const GeoGraph g = generate_rgg_connected(500, 3.0, seed);
    const auto init =
        harness::initial_values(500, "uniform", derive_seed(seed, {kSeedInitValues}));
    geo_total += static_cast<double>(geographic_gossip(g, init, StoppingRule::oracle(1e-4),
                                                       FailureModel::reliable(), seed)
                                         .ledger.total);
    pa_total += static_cast<double>(path_averaging(g, init, StoppingRule::oracle(1e-4),
                                                   FailureModel::reliable(), seed)
                                        .ledger.total);
  }
  CHECK(geo_total / 10.0 > pa_total / 10.0);
}

TEST_CASE("baseline runs are deterministic under fixed seeds") {
  const GeoGraph g = generate_rgg_connected(200, 3.0, 11);
  const auto init = harness::initial_values(200, "uniform", 2);
  const auto a = path_averaging(g, init, StoppingRule::oracle(1e-4),
                                FailureModel::reliable(), 31);
  const auto b = path_averaging(g, init, StoppingRule::oracle(1e-4),
                                FailureModel::reliable(), 31);
  CHECK(a.values == b.values);
  CHECK(a.ledger.per_node == b.ledger.per_node);
}

TEST_CASE("path averaging return-leg loss updates the delivery-end suffix only") {
  // One lossy iteration on the 3-chain: when the route covers all three
  // nodes and the return message dies after one hop, exactly the delivery
  // node and the middle node hold the path average and the source keeps its
  // value.
  const GeoGraph g = graph_from_points({{0.10, 0.5}, {0.15, 0.5}, {0.20, 0.5}}, 0.06);
  const std::vector<double> init{0.0, 3.0, 6.0};
  int suffix_updates = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    std::vector<int> path;
    int updated = -1;
    auto obs = [&](std::uint64_t, const PathIterationRecord& rec, std::span<const double>) {
      path.assign(rec.path.begin(), rec.path.end());
      updated = rec.updated_nodes;
    };
    const auto run = path_averaging(g, init, StoppingRule::fixed(1), FailureModel::lossy(0.6),
                                    seed, GossipLimits{}, obs);
    if (path.size() == 3 && updated == 2) {
      ++suffix_updates;
      CHECK(run.values[path[2]] == doctest::Approx(3.0));  // path mean of {0,3,6}
      CHECK(run.values[path[1]] == doctest::Approx(3.0));
      CHECK(run.values[path[0]] == doctest::Approx(init[path[0]]));
    }
  }
  CHECK(suffix_updates > 0);
}
