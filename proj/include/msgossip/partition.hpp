#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "msgossip/rng.hpp"
#include "msgossip/topology.hpp"

namespace msgossip {

// Recursive equal-area partition of the unit square into levels 1..k.
// Level 1 is the whole square; a level-(j-1) cell splits into
// side[j] x side[j] subcells, side[j] = max(1, round(n_{j-1}^{(1-a)/2}))
// where n_j is the expected node count of a level-j cell.
struct Hierarchy {
  int n = 0;
  int k = 1;
  double a = 2.0 / 3.0;
  std::vector<int> side;            // side[j] for j in 1..k, side[1] == 1; index 0 unused
  std::vector<long long> grid_side; // grid_side[j] = prod side[1..j] (cells per side at level j)
  std::vector<double> expected_cell_nodes;  // n_j for j in 1..k

  long long cells_at(int level) const { return grid_side[level] * grid_side[level]; }
};

Hierarchy build_hierarchy(int n, int k, double a);

// Smallest k with n^(a^(k-1)) <= M; within_bounds reports whether the finest
// expected cell size also reaches m. If no k fits both bounds, the closest
// fit (in log distance) is returned flagged.
struct AutoLevels {
  int k = 1;
  bool within_bounds = true;
  double finest_expected = 0.0;
};
AutoLevels auto_levels(int n, double a, double m, double M);

struct Cell {
  int level = 1;
  int row = 0, col = 0;  // global grid position at this level
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  std::vector<int> members;
  int representative = -1;

  Point center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool empty() const { return members.empty(); }
};

// Fully populated cell tree: every node belongs to exactly one cell per
// level (membership by floor index at the finest level, ancestors by integer
// division, so nesting is exact). Boundary points land in the cell whose low
// edge they touch; x == 1 or y == 1 clamps to the last cell.
struct CellTree {
  Hierarchy h;
  std::vector<std::vector<Cell>> levels;      // levels[j], row-major, j in 1..k (index 0 unused)
  std::vector<std::vector<int>> node_cell;    // node_cell[j][node] = flat cell index at level j

  Cell& at(int level, int flat) { return levels[level][flat]; }
  const Cell& at(int level, int flat) const { return levels[level][flat]; }
  int parent_index(int level, int flat) const;             // flat index at level-1
  std::vector<int> child_indices(int level, int flat) const;  // flat indices at level+1
};

CellTree assign_cells(const GeoGraph& g, const Hierarchy& h);

enum class RepPolicy { kCenterClosest, kRandom };

// CenterClosest: candidate minimizing distance to `center`, ties to lowest
// id. Random: uniform draw from `rng`.
int elect_among(const std::vector<int>& candidates, const GeoGraph& g, Point center,
                RepPolicy policy, Rng* rng);
// Cell-level election over its members; returns -1 for an empty cell.
int elect_representative(const Cell& cell, const GeoGraph& g, RepPolicy policy, Rng* rng);

// Logical grid graph over the representatives of the nonempty children of
// one parent cell. Edges join 4-neighbor-adjacent children; an empty child
// bridges its row/column neighbors to the nearest nonempty cell in that
// cardinal direction (gap > 1). Each edge carries greedy routes in both
// directions plus hop ceilings derived from the cell geometry.
struct OverlayEdge {
  int u = 0, v = 0;       // vertex indices
  int gap = 1;            // grid distance between the two child cells
  RoutePath forward, reverse;
  bool forward_delivered = true, reverse_delivered = true;
  int hop_ceiling = 0;        // gap-aware: ceil(sqrt((gap+1)^2+1) / (S_child * r))
  int strict_hop_ceiling = 0; // literal adjacent-cell form: ceil(sqrt(5) / (S_child * r))
};

struct OverlayGrid {
  int level = 0;        // grid level j; vertices are level-(j+1) representatives
  int parent_cell = 0;  // flat index at level j
  std::vector<int> reps;         // global node ids
  std::vector<int> child_cells;  // flat indices at level j+1, parallel to reps
  std::vector<OverlayEdge> edges;
  std::vector<std::vector<std::pair<int, int>>> adj;  // vertex -> (vertex, edge index)
  int misrouted = 0;  // routes whose delivery node differs from the target rep
  int repair_links = 0;  // extra links added when row/column bridging leaves
                         // the grid disconnected (diagonal-only occupancy)

  int size() const { return static_cast<int>(reps.size()); }
  bool vertex_connected() const;
};

// Requires representatives of the nonempty children to be set.
OverlayGrid build_overlay(const CellTree& tree, int parent_level, int parent_cell,
                          const GeoGraph& g);

// Worst-case hop estimate for a greedy-routed message between two cells
// span_cells apart on a grid of cells_per_side: ceil(sqrt(span^2+1) /
// (cells_per_side * radius)). Adjacent cells have span 2 (the sqrt(5) form).
int hop_ceiling(double span_cells, long long cells_per_side, double radius);

// Population reweighting: value * subgraph_size * siblings / parent_size.
struct ReweightFactor {
  long long subgraph_size = 0;
  long long sibling_count = 0;
  long long parent_size = 0;
  double factor() const {
    return static_cast<double>(subgraph_size) * static_cast<double>(sibling_count) /
           static_cast<double>(parent_size);
  }
};

double reweight(double value, const ReweightFactor& f);

// Debug/fixture dump: {level, bounds, member_count, representative, children[]}.
nlohmann::json hierarchy_to_json(const CellTree& tree);

}  // namespace msgossip
