#pragma once

#include <vector>

#include "json.hpp"
#include "msgossip/partition.hpp"

namespace msgossip::theory {

// Analytical predictions used to cross-check simulation: invocation counts,
// error bound and success probability, per-level cost exponents and the
// min-max subdivision optimization.

// g = 1 + n^{1-a} + n^{1-a^2} + ... + n^{1-a^{k-1}}: one randomized-gossip
// invocation per cell over all levels.
double g_count(int n, double a, int k);

// Integer variant: invocations on an actual populated hierarchy = nonempty
// cells summed over all levels (empty cells run nothing).
long long g_count_populated(const CellTree& tree);

struct ErrorPrediction {
  double bound = 0.0;                       // sqrt(2) n eps
  double g = 0.0;                           // invocation count (real-valued)
  double success_probability_lower = 0.0;   // (1-eps)^g
};
ErrorPrediction error_bound(int n, int k, double epsilon, double a);

// Per-level exponents of n in the message count for subdivision exponents
// b_1 >= ... >= b_{k-1}:
//   level 1:       2 - (3/2) b_1
//   level 1<j<k:   1 + b_{j-1} - (3/2) b_j
//   level k:       1 + b_{k-1}
// (The 3/2 coefficient is what the displayed per-level products
// (n^{1-b})^2 n^{b/2} expand to, and what makes b_1 >= 2/3 come out of the
// linearity constraint.)
std::vector<double> level_exponents(const std::vector<double>& b);

struct SubdivisionOptimum {
  std::vector<double> b;     // minimizer b_1..b_{k-1}
  double exponent = 0.0;     // min-max level exponent
  bool two_thirds_feasible = false;  // b_j = (2/3)^j meets every linear-per-level constraint
};
// Minimizes max level exponent over 1 >= b_1 >= ... >= b_{k-1} >= 0 by
// bisection on the common exponent value (the optimum equalizes all active
// levels).
SubdivisionOptimum optimal_subdivision(int k);

struct CostPrediction {
  int n = 0;
  int k = 0;
  double a = 0.0;
  double epsilon = 0.0;
  std::vector<double> level_exponents;
  double dominant_exponent = 0.0;
  double predicted_total_shape = 0.0;  // ((k-1) n + n^{1+a^{k-1}}) ln(1/eps)
};
CostPrediction predicted_cost(int n, int k, double epsilon, double a);

nlohmann::json prediction_to_json(const CostPrediction& cost, const ErrorPrediction& err);

}  // namespace msgossip::theory
