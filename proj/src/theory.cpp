#include "msgossip/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msgossip::theory {

double g_count(int n, double a, int k) {
  if (n < 1 || k < 1) throw std::invalid_argument("g_count: n, k must be positive");
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("g_count: a must be in (0,1)");
  double g = 1.0;
  for (int j = 1; j <= k - 1; ++j)
    g += std::pow(static_cast<double>(n), 1.0 - std::pow(a, j));
  return g;
}

long long g_count_populated(const CellTree& tree) {
  long long count = 0;
  for (int j = 1; j <= tree.h.k; ++j)
    for (const Cell& c : tree.levels[j])
      if (!c.empty()) ++count;
  return count;
}

ErrorPrediction error_bound(int n, int k, double epsilon, double a) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("error_bound: epsilon must be > 0");
  ErrorPrediction out;
  out.bound = std::sqrt(2.0) * static_cast<double>(n) * epsilon;
  out.g = g_count(n, a, k);
  out.success_probability_lower = epsilon < 1.0 ? std::pow(1.0 - epsilon, out.g) : 0.0;
  return out;
}

std::vector<double> level_exponents(const std::vector<double>& b) {
  const int k = static_cast<int>(b.size()) + 1;
  if (k == 1) return {2.0};  // no subdivision: one full-graph gossip on a grid-like topology
  double prev = 1.0;
  for (double bj : b) {
    if (bj > prev || bj < 0.0)
      throw std::invalid_argument("level_exponents: need 1 >= b_1 >= ... >= b_{k-1} >= 0");
    prev = bj;
  }
  std::vector<double> exps;
  exps.reserve(k);
  exps.push_back(2.0 - 1.5 * b[0]);
  for (int j = 2; j <= k - 1; ++j) exps.push_back(1.0 + b[j - 2] - 1.5 * b[j - 1]);
  exps.push_back(1.0 + b[k - 2]);
  return exps;
}

SubdivisionOptimum optimal_subdivision(int k) {
  if (k < 2) throw std::invalid_argument("optimal_subdivision: k must be >= 2");

  // Feasibility of achieving max exponent <= t: choose each b_j at its lower
  // bound; the chain is monotone automatically for t >= 1, and the last
  // level demands b_{k-1} <= t - 1.
  const auto minimal_chain = [&](double t, std::vector<double>* out) {
    double prev = (2.0 - t) / 1.5;
    prev = std::max(prev, 0.0);
    if (prev > 1.0) return false;
    if (out) out->assign(1, prev);
    for (int j = 2; j <= k - 1; ++j) {
      double bj = std::max((1.0 + prev - t) / 1.5, 0.0);
      if (bj > prev) return false;
      if (out) out->push_back(bj);
      prev = bj;
    }
    if (1.0 + prev > t) return false;
    return true;
  };

  double lo = 1.0, hi = 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (minimal_chain(mid, nullptr))
      hi = mid;
    else
      lo = mid;
  }

  SubdivisionOptimum out;
  out.exponent = hi;
  minimal_chain(hi, &out.b);

  // Is b_j = (2/3)^j feasible for the all-levels-linear constraint set
  // (level-1 and intermediate exponents <= 1)?
  std::vector<double> b23(k - 1);
  for (int j = 1; j <= k - 1; ++j) b23[j - 1] = std::pow(2.0 / 3.0, j);
  const auto exps = level_exponents(b23);
  out.two_thirds_feasible = true;
  for (int j = 0; j + 1 < static_cast<int>(exps.size()); ++j)
    if (exps[j] > 1.0 + 1e-12) out.two_thirds_feasible = false;
  return out;
}

CostPrediction predicted_cost(int n, int k, double epsilon, double a) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("predicted_cost: epsilon must be > 0");
  CostPrediction out;
  out.n = n;
  out.k = k;
  out.a = a;
  out.epsilon = epsilon;
  std::vector<double> b(std::max(0, k - 1));
  for (int j = 1; j <= k - 1; ++j) b[j - 1] = std::pow(a, j);
  out.level_exponents = level_exponents(b);
  out.dominant_exponent =
      *std::max_element(out.level_exponents.begin(), out.level_exponents.end());
  const double nd = static_cast<double>(n);
  out.predicted_total_shape =
      ((k - 1) * nd + std::pow(nd, 1.0 + std::pow(a, k - 1))) * std::log(1.0 / epsilon);
  return out;
}

nlohmann::json prediction_to_json(const CostPrediction& cost, const ErrorPrediction& err) {
  return {{"n", cost.n},
          {"k", cost.k},
          {"a", cost.a},
          {"epsilon", cost.epsilon},
          {"level_exponents", cost.level_exponents},
          {"dominant_exponent", cost.dominant_exponent},
          {"predicted_total_shape", cost.predicted_total_shape},
          {"g", err.g},
          {"bound", err.bound},
          {"success_probability_lower", err.success_probability_lower}};
}

}  // namespace msgossip::theory
