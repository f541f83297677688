#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace msgossip {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double dist2(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Random geometric graph on the unit square: nodes 0..n-1, an edge wherever
// the Euclidean distance is <= radius. Coordinates are stored SoA so the
// distance kernels can scan them directly.
struct GeoGraph {
  int n = 0;
  double c = 0.0;       // radius constant, radius = sqrt(c ln n / n)
  double radius = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> xs, ys;
  std::vector<std::vector<int>> adj;  // sorted neighbor ids, symmetric, no self-loops

  Point coord(int i) const { return {xs[i], ys[i]}; }
  double dist2_to(int i, Point t) const {
    const double dx = xs[i] - t.x;
    const double dy = ys[i] - t.y;
    return dx * dx + dy * dy;
  }
  std::size_t edge_count() const;
  bool connected() const;
};

struct RoutePath {
  std::vector<int> hops;  // node ids, source first
  int hop_count() const { return static_cast<int>(hops.size()) - 1; }
  int delivery() const { return hops.back(); }
};

// Connectivity radius sqrt(c ln n / n), capped at sqrt(2) (the unit-square
// diameter) so tiny n stays well defined.
double rgg_radius(int n, double c);

// Uniform i.i.d. placement from `seed`; identical (n, c, seed) give
// bit-identical graphs.
GeoGraph generate_rgg(int n, double c, std::uint64_t seed);

// Retries seed, seed+1, ... until the graph is connected (the analysis
// assumes connected instances); throws after max_attempts.
GeoGraph generate_rgg_connected(int n, double c, std::uint64_t seed, int max_attempts = 100);

// Builds a graph from fixed coordinates (fixtures, JSON import).
GeoGraph graph_from_points(const std::vector<Point>& pts, double radius, double c = 0.0,
                           std::uint64_t seed = 0);

// Node minimizing Euclidean distance to target, ties to the lowest id.
int closest_node(const GeoGraph& g, Point target);

// Greedy geographic routing: forward to the neighbor closest to the target,
// stop at the first node closer than all of its neighbors. Distance ties are
// broken by lowest node id, so routes are deterministic. Always terminates
// (distance to target strictly decreases), but on sparse graphs the delivery
// node may differ from closest_node.
RoutePath greedy_route(const GeoGraph& g, int source, Point target);

nlohmann::json graph_to_json(const GeoGraph& g);
// Recomputes adjacency from the stored coordinates and radius; validates
// coordinates lie in the unit square.
GeoGraph graph_from_json(const nlohmann::json& j);

}  // namespace msgossip
