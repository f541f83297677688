#include <cmath>
#include <set>

#include "doctest.h"
#include "msgossip/rng.hpp"
#include "msgossip/topology.hpp"
#include "oracles.hpp"

using namespace msgossip;

TEST_CASE("single node: empty adjacency") {
  const GeoGraph g = generate_rgg(1, 3.0, 7);
  CHECK(g.n == 1);
  CHECK(g.adj[0].empty());
  CHECK(g.connected());
}

TEST_CASE("radius formula at n=5000, c=3") {
  const GeoGraph g = generate_rgg(5000, 3.0, 1);
  const double expect = std::sqrt(3.0 * std::log(5000.0) / 5000.0);
  CHECK(g.radius == expect);
  CHECK(g.radius == doctest::Approx(0.0714864736).epsilon(1e-8));
}

TEST_CASE("radius is capped at sqrt(2)") {
  CHECK(rgg_radius(2, 100.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(rgg_radius(2, 3.0) == doctest::Approx(std::sqrt(3.0 * std::log(2.0) / 2.0)));
}

TEST_CASE("adjacency equals the all-pairs oracle") {
  for (const int n : {4, 60, 300}) {
    const GeoGraph g = generate_rgg(n, 3.0, 0);
    CHECK(g.adj == oracles::brute_adjacency(g));
  }
}

TEST_CASE("adjacency is symmetric with no self-loops") {
  const GeoGraph g = generate_rgg(400, 3.0, 11);
  for (int i = 0; i < g.n; ++i) {
    for (int j : g.adj[i]) {
      CHECK(j != i);
      const auto& back = g.adj[j];
      CHECK(std::find(back.begin(), back.end(), i) != back.end());
    }
  }
}

TEST_CASE("identical (n, c, seed) gives bit-identical graphs") {
  const GeoGraph a = generate_rgg(250, 3.0, 99);
  const GeoGraph b = generate_rgg(250, 3.0, 99);
  CHECK(a.xs == b.xs);
  CHECK(a.ys == b.ys);
  CHECK(a.adj == b.adj);
}

TEST_CASE("increasing c never removes an edge (same seed)") {
  const GeoGraph lo = generate_rgg(300, 2.0, 5);
  const GeoGraph hi = generate_rgg(300, 3.0, 5);
  CHECK(lo.xs == hi.xs);
  for (int i = 0; i < lo.n; ++i)
    for (int j : lo.adj[i])
      CHECK(std::find(hi.adj[i].begin(), hi.adj[i].end(), j) != hi.adj[i].end());
}

TEST_CASE("generate_rgg_connected retries seeds until connected") {
  const GeoGraph g = generate_rgg_connected(100, 3.0, 3);
  CHECK(g.connected());
  CHECK(g.seed >= 3);
}

TEST_CASE("closest_node: exact hit, tie-break, and scan oracle") {
  const GeoGraph g = generate_rgg(50, 3.0, 21);
  CHECK(closest_node(g, g.coord(3)) == 3);

  // two nodes equidistant from the target resolve to the lower id
  const GeoGraph two =
      graph_from_points({{0.25, 0.5}, {0.75, 0.5}}, 0.1);
  CHECK(closest_node(two, {0.5, 0.5}) == 0);

  Rng rng(1234);
  for (int t = 0; t < 200; ++t) {
    const Point target{rng.uniform01(), rng.uniform01()};
    CHECK(closest_node(g, target) == oracles::scan_closest(g, target));
  }
}

TEST_CASE("greedy route to own coordinates is a zero-hop path") {
  const GeoGraph g = generate_rgg(80, 3.0, 2);
  const RoutePath p = greedy_route(g, 17, g.coord(17));
  CHECK(p.hops == std::vector<int>{17});
  CHECK(p.hop_count() == 0);
}

TEST_CASE("greedy route on a collinear chain walks hop by hop") {
  const GeoGraph g = graph_from_points(
      {{0.0, 0.5}, {0.05, 0.5}, {0.10, 0.5}}, 0.06);
  const RoutePath p = greedy_route(g, 0, {0.10, 0.5});
  CHECK(p.hops == std::vector<int>{0, 1, 2});
  CHECK(p.hop_count() == 2);
}

TEST_CASE("routing terminates within n steps and strictly approaches the target") {
  const GeoGraph g = generate_rgg(300, 3.0, 8);
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const int src = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(g.n)));
    const Point target{rng.uniform01(), rng.uniform01()};
    const RoutePath p = greedy_route(g, src, target);
    REQUIRE(static_cast<int>(p.hops.size()) <= g.n);
    for (std::size_t i = 1; i < p.hops.size(); ++i)
      CHECK(g.dist2_to(p.hops[i], target) < g.dist2_to(p.hops[i - 1], target));
    const std::set<int> unique(p.hops.begin(), p.hops.end());
    CHECK(unique.size() == p.hops.size());
  }
}

TEST_CASE("greedy delivery matches closest_node on nearly all queries (n=200, c=3)") {
  int hits = 0, total = 0;
  const GeoGraph g = generate_rgg_connected(200, 3.0, 77);
  Rng rng(991);
  for (int t = 0; t < 1000; ++t) {
    const int src = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(g.n)));
    const Point target{rng.uniform01(), rng.uniform01()};
    if (greedy_route(g, src, target).delivery() == closest_node(g, target)) ++hits;
    ++total;
  }
  CHECK(static_cast<double>(hits) / total >= 0.99);
}

TEST_CASE("graph JSON round-trips exactly and recomputes adjacency") {
  const GeoGraph g = generate_rgg(120, 3.0, 31);
  const GeoGraph back = graph_from_json(graph_to_json(g));
  CHECK(back.n == g.n);
  CHECK(back.radius == g.radius);
  CHECK(back.seed == g.seed);
  CHECK(back.xs == g.xs);
  CHECK(back.ys == g.ys);
  CHECK(back.adj == g.adj);
}

TEST_CASE("graph JSON import rejects out-of-square coordinates") {
  nlohmann::json j = graph_to_json(generate_rgg(3, 3.0, 1));
  j["coords"][1][0] = 1.5;
  CHECK_THROWS_AS(graph_from_json(j), std::invalid_argument);
}
