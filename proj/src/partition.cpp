#include "msgossip/partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msgossip {

Hierarchy build_hierarchy(int n, int k, double a) {
  if (n < 1) throw std::invalid_argument("build_hierarchy: n must be positive");
  if (k < 1) throw std::invalid_argument("build_hierarchy: k must be >= 1");
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("build_hierarchy: a must be in (0,1)");
  Hierarchy h;
  h.n = n;
  h.k = k;
  h.a = a;
  h.side.assign(k + 1, 1);
  h.grid_side.assign(k + 1, 1);
  h.expected_cell_nodes.assign(k + 1, static_cast<double>(n));
  double expected = static_cast<double>(n);
  for (int j = 2; j <= k; ++j) {
    const int side = std::max<long long>(1, std::llround(std::pow(expected, (1.0 - a) / 2.0)));
    h.side[j] = static_cast<int>(side);
    h.grid_side[j] = h.grid_side[j - 1] * side;
    expected /= static_cast<double>(side) * static_cast<double>(side);
    h.expected_cell_nodes[j] = expected;
  }
  return h;
}

AutoLevels auto_levels(int n, double a, double m, double M) {
  if (!(m >= 2.0 && M >= m)) throw std::invalid_argument("auto_levels: need 2 <= m <= M");
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("auto_levels: a must be in (0,1)");
  const auto finest = [&](int k) {
    return std::pow(static_cast<double>(n), std::pow(a, k - 1));
  };
  int k = 1;
  while (finest(k) > M) ++k;
  AutoLevels out;
  out.k = k;
  out.finest_expected = finest(k);
  out.within_bounds = out.finest_expected >= m;
  if (!out.within_bounds && k > 1) {
    // No k fits [m, M]; pick the closer of undershooting at k and
    // overshooting at k-1, in log distance.
    const double under = std::log(m / finest(k));
    const double over = std::log(finest(k - 1) / M);
    if (over < under) {
      out.k = k - 1;
      out.finest_expected = finest(k - 1);
    }
  }
  return out;
}

int CellTree::parent_index(int level, int flat) const {
  const long long s = h.grid_side[level];
  const long long row = flat / s;
  const long long col = flat % s;
  const int split = h.side[level];
  return static_cast<int>((row / split) * h.grid_side[level - 1] + (col / split));
}

std::vector<int> CellTree::child_indices(int level, int flat) const {
  const long long s = h.grid_side[level];
  const long long row = flat / s;
  const long long col = flat % s;
  const int split = h.side[level + 1];
  const long long cs = h.grid_side[level + 1];
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(split) * split);
  for (int dr = 0; dr < split; ++dr)
    for (int dc = 0; dc < split; ++dc)
      out.push_back(static_cast<int>((row * split + dr) * cs + (col * split + dc)));
  return out;
}

CellTree assign_cells(const GeoGraph& g, const Hierarchy& h) {
  if (h.n != g.n) throw std::invalid_argument("assign_cells: hierarchy built for different n");
  CellTree tree;
  tree.h = h;
  tree.levels.resize(h.k + 1);
  tree.node_cell.assign(h.k + 1, std::vector<int>(g.n, 0));

  for (int j = 1; j <= h.k; ++j) {
    const long long s = h.grid_side[j];
    tree.levels[j].resize(static_cast<std::size_t>(s) * s);
    for (long long row = 0; row < s; ++row) {
      for (long long col = 0; col < s; ++col) {
        Cell& cell = tree.levels[j][row * s + col];
        cell.level = j;
        cell.row = static_cast<int>(row);
        cell.col = static_cast<int>(col);
        cell.x0 = static_cast<double>(col) / static_cast<double>(s);
        cell.x1 = static_cast<double>(col + 1) / static_cast<double>(s);
        cell.y0 = static_cast<double>(row) / static_cast<double>(s);
        cell.y1 = static_cast<double>(row + 1) / static_cast<double>(s);
      }
    }
  }

  // Finest-level index by floor, coarser levels by integer division: nesting
  // is exact and each node lands in exactly one cell per level.
  const long long sk = h.grid_side[h.k];
  const auto grid_index = [&](double v) {
    return std::min<long long>(static_cast<long long>(v * static_cast<double>(sk)), sk - 1);
  };
  for (int i = 0; i < g.n; ++i) {
    long long row = grid_index(g.ys[i]);
    long long col = grid_index(g.xs[i]);
    for (int j = h.k; j >= 1; --j) {
      const long long s = h.grid_side[j];
      const int flat = static_cast<int>(row * s + col);
      tree.levels[j][flat].members.push_back(i);
      tree.node_cell[j][i] = flat;
      if (j > 1) {
        row /= h.side[j];
        col /= h.side[j];
      }
    }
  }
  return tree;
}

int elect_among(const std::vector<int>& candidates, const GeoGraph& g, Point center,
                RepPolicy policy, Rng* rng) {
  if (candidates.empty()) return -1;
  if (policy == RepPolicy::kRandom) {
    if (rng == nullptr) throw std::invalid_argument("elect_among: random policy needs an rng");
    return candidates[rng->uniform_int(static_cast<std::uint32_t>(candidates.size()))];
  }
  int best = candidates[0];
  double best_d2 = g.dist2_to(best, center);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const int cand = candidates[i];
    const double d2 = g.dist2_to(cand, center);
    if (d2 < best_d2 || (d2 == best_d2 && cand < best)) {
      best_d2 = d2;
      best = cand;
    }
  }
  return best;
}

int elect_representative(const Cell& cell, const GeoGraph& g, RepPolicy policy, Rng* rng) {
  return elect_among(cell.members, g, cell.center(), policy, rng);
}

bool OverlayGrid::vertex_connected() const {
  if (reps.empty()) return true;
  std::vector<char> seen(reps.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (auto [v, e] : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == reps.size();
}

int hop_ceiling(double span_cells, long long cells_per_side, double radius) {
  const double dist = std::sqrt(span_cells * span_cells + 1.0) /
                      static_cast<double>(cells_per_side);
  return static_cast<int>(std::ceil(dist / radius));
}

OverlayGrid build_overlay(const CellTree& tree, int parent_level, int parent_cell,
                          const GeoGraph& g) {
  const Hierarchy& h = tree.h;
  if (parent_level < 1 || parent_level >= h.k)
    throw std::invalid_argument("build_overlay: parent level must be in [1, k)");
  OverlayGrid grid;
  grid.level = parent_level;
  grid.parent_cell = parent_cell;

  const int child_level = parent_level + 1;
  const int split = h.side[child_level];
  const long long cs = h.grid_side[child_level];
  const long long prow = parent_cell / h.grid_side[parent_level];
  const long long pcol = parent_cell % h.grid_side[parent_level];

  // vertex index per local child position, -1 where the child cell is empty
  std::vector<int> vtx(static_cast<std::size_t>(split) * split, -1);
  for (int dr = 0; dr < split; ++dr) {
    for (int dc = 0; dc < split; ++dc) {
      const int flat = static_cast<int>((prow * split + dr) * cs + (pcol * split + dc));
      const Cell& child = tree.at(child_level, flat);
      if (child.empty()) continue;
      if (child.representative < 0)
        throw std::logic_error("build_overlay: nonempty child without representative");
      vtx[dr * split + dc] = grid.size();
      grid.reps.push_back(child.representative);
      grid.child_cells.push_back(flat);
    }
  }
  grid.adj.resize(grid.reps.size());

  // span: worst-case distance between points of the two child cells, in
  // child-cell sides (edge-adjacent rows/cols: sqrt((gap+1)^2 + 1)).
  const auto add_edge = [&](int u, int v, int gap, double span) {
    OverlayEdge e;
    e.u = u;
    e.v = v;
    e.gap = gap;
    const int ru = grid.reps[u];
    const int rv = grid.reps[v];
    e.forward = greedy_route(g, ru, g.coord(rv));
    e.reverse = greedy_route(g, rv, g.coord(ru));
    e.forward_delivered = e.forward.delivery() == rv;
    e.reverse_delivered = e.reverse.delivery() == ru;
    if (!e.forward_delivered) ++grid.misrouted;
    if (!e.reverse_delivered) ++grid.misrouted;
    e.hop_ceiling = static_cast<int>(
        std::ceil(span / (static_cast<double>(cs) * g.radius)));
    e.strict_hop_ceiling = hop_ceiling(2.0, cs, g.radius);
    const int idx = static_cast<int>(grid.edges.size());
    grid.adj[u].emplace_back(v, idx);
    grid.adj[v].emplace_back(u, idx);
    grid.edges.push_back(std::move(e));
  };
  const auto line_span = [](int gap) {
    const double d = static_cast<double>(gap) + 1.0;
    return std::sqrt(d * d + 1.0);
  };

  // Rows then columns: consecutive nonempty cells in each line are linked,
  // which bridges holes to the nearest nonempty cell in that direction.
  for (int dr = 0; dr < split; ++dr) {
    int prev = -1, prev_dc = 0;
    for (int dc = 0; dc < split; ++dc) {
      const int v = vtx[dr * split + dc];
      if (v < 0) continue;
      if (prev >= 0) add_edge(prev, v, dc - prev_dc, line_span(dc - prev_dc));
      prev = v;
      prev_dc = dc;
    }
  }
  for (int dc = 0; dc < split; ++dc) {
    int prev = -1, prev_dr = 0;
    for (int dr = 0; dr < split; ++dr) {
      const int v = vtx[dr * split + dc];
      if (v < 0) continue;
      if (prev >= 0) add_edge(prev, v, dr - prev_dr, line_span(dr - prev_dr));
      prev = v;
      prev_dr = dr;
    }
  }

  // Row/column bridging can still leave the grid disconnected (e.g. a 2x2
  // block occupied only on a diagonal). Stitch remaining components together
  // with the minimal grid-distance vertex pair, tie-broken by vertex index.
  while (grid.size() > 1 && !grid.vertex_connected()) {
    std::vector<char> in_main(grid.reps.size(), 0);
    std::vector<int> stack{0};
    in_main[0] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (auto [v, e] : grid.adj[u]) {
        if (!in_main[v]) {
          in_main[v] = 1;
          stack.push_back(v);
        }
      }
    }
    int best_u = -1, best_v = -1;
    long long best_d2 = 0;
    double best_span = 0.0;
    int best_gap = 0;
    for (int u = 0; u < grid.size(); ++u) {
      if (!in_main[u]) continue;
      const long long ur = grid.child_cells[u] / cs, uc = grid.child_cells[u] % cs;
      for (int v = 0; v < grid.size(); ++v) {
        if (in_main[v]) continue;
        const long long vr = grid.child_cells[v] / cs, vc = grid.child_cells[v] % cs;
        const long long dr = vr - ur, dc = vc - uc;
        const long long d2 = dr * dr + dc * dc;
        if (best_u < 0 || d2 < best_d2) {
          best_d2 = d2;
          best_u = u;
          best_v = v;
          best_gap = static_cast<int>(std::max(std::llabs(dr), std::llabs(dc)));
          const double sx = static_cast<double>(std::llabs(dc)) + 1.0;
          const double sy = static_cast<double>(std::llabs(dr)) + 1.0;
          best_span = std::sqrt(sx * sx + sy * sy);
        }
      }
    }
    add_edge(best_u, best_v, best_gap, best_span);
    ++grid.repair_links;
  }
  return grid;
}

double reweight(double value, const ReweightFactor& f) {
  if (f.subgraph_size <= 0 || f.sibling_count <= 0 || f.parent_size <= 0)
    throw std::invalid_argument("reweight: factor fields must be positive");
  return value * f.factor();
}

namespace {

nlohmann::json cell_to_json(const CellTree& tree, int level, int flat) {
  const Cell& c = tree.at(level, flat);
  nlohmann::json j{{"level", level},
                   {"bounds", {c.x0, c.y0, c.x1, c.y1}},
                   {"member_count", c.members.size()},
                   {"representative", c.representative}};
  nlohmann::json children = nlohmann::json::array();
  if (level < tree.h.k) {
    for (int child : tree.child_indices(level, flat))
      children.push_back(cell_to_json(tree, level + 1, child));
  }
  j["children"] = std::move(children);
  return j;
}

}  // namespace

nlohmann::json hierarchy_to_json(const CellTree& tree) { return cell_to_json(tree, 1, 0); }

}  // namespace msgossip
