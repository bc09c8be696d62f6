#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "fairlot/fairlot.hpp"

namespace testutil {

// Knapsack with four agents and capacity 6: three optimal solutions
// (1,0,0,0), (0,1,1,0), (0,1,0,1), z* = 4.
inline fairlot::IlpInstance example_knapsack() {
  fairlot::IlpInstance inst;
  inst.name = "example-knapsack";
  inst.n_agents = 4;
  inst.agent_objective = {4, 3, 1, 1};
  inst.agent_domain.assign(4, fairlot::VarDomain::binary());
  inst.rows.push_back({{{0, 4.0}, {1, 2.5}, {2, 2.5}, {3, 2.5}}, fairlot::Rel::le, 6.0});
  return inst;
}

// Knapsack with a twin pair: four optimal solutions of value 3.
inline fairlot::IlpInstance intro_knapsack() {
  fairlot::IlpInstance inst;
  inst.name = "intro-knapsack";
  inst.n_agents = 4;
  inst.agent_objective = {2, 1, 1, 1};
  inst.agent_domain.assign(4, fairlot::VarDomain::binary());
  inst.rows.push_back({{{0, 2.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}, fairlot::Rel::le, 3.0});
  return inst;
}

// Random dichotomous instances biased toward objective ties, so the optimal
// set is usually non-trivial. Two families: knapsack-like with value equal to
// weight, and small random packing constraints.
inline fairlot::IlpInstance random_dichotomous(std::uint64_t seed, int n_max = 10) {
  fairlot::CounterRng rng(seed);
  int n = 4 + static_cast<int>(rng.next_below(n_max - 3));
  fairlot::IlpInstance inst;
  inst.n_agents = n;
  inst.agent_domain.assign(n, fairlot::VarDomain::binary());
  inst.agent_objective.resize(n);
  if (rng.next_below(2) == 0) {
    fairlot::LinearRow row;
    double total = 0;
    for (int i = 0; i < n; ++i) {
      double w = 1.0 + static_cast<double>(rng.next_below(4));
      inst.agent_objective[i] = w;
      row.coeffs.push_back({i, w});
      total += w;
    }
    row.rel = fairlot::Rel::le;
    row.rhs = std::floor(total / 2);
    inst.rows.push_back(row);
  } else {
    int m = 1 + static_cast<int>(rng.next_below(3));
    for (int i = 0; i < n; ++i)
      inst.agent_objective[i] = 1.0 + static_cast<double>(rng.next_below(3));
    for (int r = 0; r < m; ++r) {
      fairlot::LinearRow row;
      double total = 0;
      for (int i = 0; i < n; ++i) {
        double a = static_cast<double>(rng.next_below(3));
        if (a > 0) {
          row.coeffs.push_back({i, a});
          total += a;
        }
      }
      row.rel = fairlot::Rel::le;
      row.rhs = std::max(1.0, std::floor(total * 0.45));
      inst.rows.push_back(row);
    }
  }
  return inst;
}

// Exhaustive 0/1 oracle for agent-only instances (no aux variables).
inline std::vector<std::vector<double>> exhaustive_binary_optima(const fairlot::IlpInstance& inst,
                                                                 double* z_out = nullptr) {
  int n = inst.n_agents;
  double best = -fairlot::kInf;
  std::vector<std::vector<double>> argbest;
  for (long mask = 0; mask < (1L << n); ++mask) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = (mask >> i) & 1 ? 1.0 : 0.0;
    bool feasible = true;
    for (const auto& row : inst.rows) {
      double lhs = 0;
      for (auto [j, a] : row.coeffs) lhs += a * x[j];
      if (row.rel == fairlot::Rel::le && lhs > row.rhs + 1e-9) feasible = false;
      if (row.rel == fairlot::Rel::ge && lhs < row.rhs - 1e-9) feasible = false;
      if (row.rel == fairlot::Rel::eq && std::abs(lhs - row.rhs) > 1e-9) feasible = false;
    }
    if (!feasible) continue;
    double obj = 0;
    for (int i = 0; i < n; ++i) obj += inst.agent_objective[i] * x[i];
    if (obj > best + 1e-9) {
      best = obj;
      argbest.clear();
    }
    if (obj > best - 1e-9) argbest.push_back(x);
  }
  if (z_out) *z_out = best;
  return argbest;
}

// All-permutation schedule oracle for tardiness instances: optimal total
// utility and the distinct optimal utility vectors.
inline std::pair<double, std::vector<std::vector<double>>> permutation_schedule_oracle(
    const fairlot::TardinessInstance& tt) {
  int n = tt.jobs();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  double best = -fairlot::kInf;
  std::vector<std::vector<double>> argbest;
  do {
    int t = 0;
    std::vector<double> u(n);
    double total = 0;
    for (int j : order) {
      t += tt.processing[j];
      u[j] = -std::max(0, t - tt.due[j]);
      total += u[j];
    }
    if (total > best + 1e-9) {
      best = total;
      argbest.clear();
    }
    if (total > best - 1e-9 &&
        std::find(argbest.begin(), argbest.end(), u) == argbest.end())
      argbest.push_back(u);
  } while (std::next_permutation(order.begin(), order.end()));
  return {best, argbest};
}

inline fairlot::SolutionPool pool_from_vectors(const std::vector<std::vector<double>>& xs,
                                               double z_star = 0.0, bool complete = true) {
  fairlot::SolutionPool pool;
  pool.z_star = z_star;
  pool.complete = complete;
  for (const auto& x : xs) pool.add({x, {}, z_star});
  return pool;
}

}  // namespace testutil
