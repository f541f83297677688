#include "msgossip/topology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "msgossip/kernels.hpp"
#include "msgossip/rng.hpp"

namespace msgossip {

std::size_t GeoGraph::edge_count() const {
  std::size_t deg = 0;
  for (const auto& a : adj) deg += a.size();
  return deg / 2;
}

bool GeoGraph::connected() const {
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

double rgg_radius(int n, double c) {
  if (n < 1) throw std::invalid_argument("rgg_radius: n must be positive");
  const double r = std::sqrt(c * std::log(static_cast<double>(n)) / n);
  return std::min(r, std::sqrt(2.0));
}

namespace {

// Bucket grid over the unit square with pitch >= radius; neighbor candidates
// of a node are confined to the 3x3 surrounding buckets. Nodes are permuted
// into bucket-contiguous SoA arrays so the radius-filter kernel can scan each
// candidate bucket as one contiguous slice.
void build_adjacency(GeoGraph& g) {
  g.adj.assign(g.n, {});
  if (g.n <= 1 || g.radius <= 0.0) return;

  const int buckets = std::max(1, static_cast<int>(1.0 / g.radius));
  const double pitch = 1.0 / buckets;
  const auto bucket_of = [&](double v) {
    int b = static_cast<int>(v / pitch);
    return std::min(b, buckets - 1);
  };

  std::vector<int> count(buckets * buckets, 0);
  std::vector<int> node_bucket(g.n);
  for (int i = 0; i < g.n; ++i) {
    const int b = bucket_of(g.ys[i]) * buckets + bucket_of(g.xs[i]);
    node_bucket[i] = b;
    ++count[b];
  }
  std::vector<int> start(buckets * buckets + 1, 0);
  for (int b = 0; b < buckets * buckets; ++b) start[b + 1] = start[b] + count[b];
  std::vector<int> order(g.n);        // slot -> node id
  std::vector<int> cursor(start.begin(), start.end() - 1);
  for (int i = 0; i < g.n; ++i) order[cursor[node_bucket[i]]++] = i;

  std::vector<double> bx(g.n), by(g.n);
  for (int s = 0; s < g.n; ++s) {
    bx[s] = g.xs[order[s]];
    by[s] = g.ys[order[s]];
  }

  const double r2 = g.radius * g.radius;
  const auto& k = kernels::ops();
  std::vector<std::uint32_t> hits;
  for (int i = 0; i < g.n; ++i) {
    hits.clear();
    const int brow = node_bucket[i] / buckets;
    const int bcol = node_bucket[i] % buckets;
    for (int dr = -1; dr <= 1; ++dr) {
      const int row = brow + dr;
      if (row < 0 || row >= buckets) continue;
      const int c0 = std::max(0, bcol - 1);
      const int c1 = std::min(buckets - 1, bcol + 1);
      // columns c0..c1 of one row are contiguous in slot order
      const int s0 = start[row * buckets + c0];
      const int s1 = start[row * buckets + c1 + 1];
      if (s1 > s0) {
        k.collect_within(bx.data() + s0, by.data() + s0, static_cast<std::size_t>(s1 - s0),
                         g.xs[i], g.ys[i], r2, static_cast<std::uint32_t>(s0), hits);
      }
    }
    auto& nbrs = g.adj[i];
    nbrs.reserve(hits.size());
    for (std::uint32_t slot : hits) {
      const int j = order[slot];
      if (j != i) nbrs.push_back(j);
    }
    std::sort(nbrs.begin(), nbrs.end());
  }
}

}  // namespace

GeoGraph generate_rgg(int n, double c, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_rgg: n must be positive");
  if (c <= 0.0) throw std::invalid_argument("generate_rgg: c must be positive");
  GeoGraph g;
  g.n = n;
  g.c = c;
  g.radius = rgg_radius(n, c);
  g.seed = seed;
  g.xs.resize(n);
  g.ys.resize(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    g.xs[i] = rng.uniform01();
    g.ys[i] = rng.uniform01();
  }
  build_adjacency(g);
  return g;
}

GeoGraph generate_rgg_connected(int n, double c, std::uint64_t seed, int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    GeoGraph g = generate_rgg(n, c, seed + static_cast<std::uint64_t>(attempt));
    if (g.connected()) return g;
  }
  throw std::runtime_error("generate_rgg_connected: no connected instance within attempt budget");
}

GeoGraph graph_from_points(const std::vector<Point>& pts, double radius, double c,
                           std::uint64_t seed) {
  GeoGraph g;
  g.n = static_cast<int>(pts.size());
  g.c = c;
  g.radius = radius;
  g.seed = seed;
  g.xs.resize(g.n);
  g.ys.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    g.xs[i] = pts[i].x;
    g.ys[i] = pts[i].y;
  }
  build_adjacency(g);
  return g;
}

int closest_node(const GeoGraph& g, Point target) {
  if (g.n < 1) throw std::invalid_argument("closest_node: empty graph");
  return static_cast<int>(
      kernels::ops().argmin_dist2(g.xs.data(), g.ys.data(), g.xs.size(), target.x, target.y));
}

RoutePath greedy_route(const GeoGraph& g, int source, Point target) {
  RoutePath path;
  int cur = source;
  double cur_d2 = g.dist2_to(cur, target);
  path.hops.push_back(cur);
  for (;;) {
    int best = -1;
    double best_d2 = cur_d2;
    for (int nb : g.adj[cur]) {
      const double d2 = g.dist2_to(nb, target);
      if (d2 < best_d2 || (best >= 0 && d2 == best_d2 && nb < best)) {
        best_d2 = d2;
        best = nb;
      }
    }
    if (best < 0) break;
    cur = best;
    cur_d2 = best_d2;
    path.hops.push_back(cur);
  }
  return path;
}

nlohmann::json graph_to_json(const GeoGraph& g) {
  nlohmann::json coords = nlohmann::json::array();
  for (int i = 0; i < g.n; ++i) coords.push_back({g.xs[i], g.ys[i]});
  return {{"n", g.n}, {"c", g.c}, {"radius", g.radius}, {"seed", g.seed}, {"coords", coords}};
}

GeoGraph graph_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  const auto& coords = j.at("coords");
  if (static_cast<int>(coords.size()) != n)
    throw std::invalid_argument("graph_from_json: coords length does not match n");
  std::vector<Point> pts;
  pts.reserve(n);
  for (const auto& p : coords) {
    Point pt{p.at(0).get<double>(), p.at(1).get<double>()};
    if (pt.x < 0.0 || pt.x > 1.0 || pt.y < 0.0 || pt.y > 1.0)
      throw std::invalid_argument("graph_from_json: coordinate outside the unit square");
    pts.push_back(pt);
  }
  GeoGraph g = graph_from_points(pts, j.at("radius").get<double>(), j.at("c").get<double>(),
                                 j.at("seed").get<std::uint64_t>());
  return g;
}

}  // namespace msgossip
