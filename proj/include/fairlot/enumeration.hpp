#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "fairlot/ops.hpp"

namespace fairlot {

/// No-good cut excluding exactly the binary agent vector `x`:
/// sum_{i: x_i=0} x_i + sum_{i: x_i=1} (1 - x_i) >= 1.
inline LinearRow no_good_cut(const std::vector<double>& x, int n_agents) {
  LinearRow row;
  row.rel = Rel::ge;
  double ones = 0.0;
  for (int i = 0; i < n_agents; ++i) {
    if (std::round(x[i]) == 1.0) {
      row.coeffs.push_back({i, -1.0});
      ones += 1.0;
    } else {
      row.coeffs.push_back({i, 1.0});
    }
  }
  row.rhs = 1.0 - ones;
  return row;
}

/// Enumerate distinct x-projections of the (near-)optimal set by repeatedly
/// solving the bounded instance and cutting off each found solution. Stops at
/// infeasibility (pool is then complete) or at `cap` solutions.
inline SolutionPool enumerate_optimal(const IlpInstance& inst, double z_star, int cap,
                                      const SolverConfig& config = {},
                                      const NearOptConfig& near = {},
                                      SolverBackend& backend = builtin_backend()) {
  config.validate();
  if (inst.mode != Mode::dichotomous)
    throw Error("enumerate_optimal: requires dichotomous mode");
  if (cap < 1) throw ConfigError("enumerate_optimal: cap must be >= 1");

  SolutionPool pool;
  pool.z_star = z_star;
  IlpInstance work = with_optimality_bound(inst, z_star, near);
  std::vector<bool> mask = integer_mask(work);
  MipOptions opt = mip_options(config);
  opt.stop_first_incumbent = true;
  opt.bound_abort = optimality_bound_rhs(z_star, near) - config.omega;

  while (pool.size() < cap) {
    MipSolution res = backend.solve_mip(build_lp(work), mask, opt);
    if (!res.feasible()) {
      pool.complete = true;
      return pool;
    }
    Solution s = split_solution(inst, res.x);
    for (double& v : s.x) v = std::round(v);
    int before = pool.size();
    pool.add(s);
    if (pool.size() == before)
      throw NonConvergenceError("enumerate_optimal: solver returned a cut-off solution");
    work.rows.push_back(no_good_cut(s.x, inst.n_agents));
  }
  pool.complete = false;
  return pool;
}

/// The uniform rule: every pool solution gets the same weight. Callers must
/// treat the result as approximate when the pool is not complete.
inline std::pair<Distribution, Lottery> uniform_rule(const SolutionPool& pool) {
  if (pool.empty()) throw EmptyPoolError("uniform_rule: empty pool");
  int n = static_cast<int>(pool[0].x.size());
  Lottery lot;
  lot.weights.assign(pool.size(), 1.0 / pool.size());
  Distribution d;
  d.values.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int s = 0; s < pool.size(); ++s) sum += pool[s].x[i];
    d.values[i] = sum / pool.size();
  }
  return {std::move(d), std::move(lot)};
}

/// Greedily collect optimal solutions until every agent of M is selected in
/// at least one of them: each round adds the row "select someone uncovered".
/// A cover is a column-generation warm start, never a substitute for the
/// exact partition.
inline SolutionPool greedy_cover(const IlpInstance& inst, double z_star,
                                 const std::vector<int>& M, const SolverConfig& config = {},
                                 const NearOptConfig& near = {},
                                 SolverBackend& backend = builtin_backend()) {
  config.validate();
  if (inst.mode != Mode::dichotomous) throw Error("greedy_cover: requires dichotomous mode");
  SolutionPool pool;
  pool.z_star = z_star;
  if (M.empty()) return pool;

  IlpInstance bounded = with_optimality_bound(inst, z_star, near);
  std::vector<bool> mask = integer_mask(bounded);
  MipOptions opt = mip_options(config);
  opt.stop_first_incumbent = true;
  opt.bound_abort = optimality_bound_rhs(z_star, near) - config.omega;

  std::vector<int> uncovered = M;
  while (!uncovered.empty()) {
    IlpInstance work = bounded;
    LinearRow row;
    for (int i : uncovered) row.coeffs.push_back({i, 1.0});
    row.rel = Rel::ge;
    row.rhs = 1.0;
    work.rows.push_back(std::move(row));
    MipSolution res = backend.solve_mip(build_lp(work), mask, opt);
    if (!res.feasible())
      throw InfeasibleError("greedy_cover: uncovered agent has no witness (M too large?)");
    Solution s = split_solution(inst, res.x);
    for (double& v : s.x) v = std::round(v);
    pool.add(s);
    std::vector<int> still;
    for (int i : uncovered)
      if (s.x[i] != 1.0) still.push_back(i);
    uncovered = std::move(still);
  }
  return pool;
}

/// Build an instance whose optimal x-projections are exactly the given 0/1
/// outcome vectors: constant objective plus one no-good cut per excluded
/// vector. Only sensible for small n; used by audits and tests.
inline IlpInstance instance_from_outcomes(const std::vector<std::vector<double>>& outcomes) {
  if (outcomes.empty()) throw Error("instance_from_outcomes: need at least one outcome");
  int n = static_cast<int>(outcomes[0].size());
  if (n > 20) throw Error("instance_from_outcomes: too many agents");
  IlpInstance inst;
  inst.n_agents = n;
  inst.agent_objective.assign(n, 0.0);
  inst.agent_domain.assign(n, VarDomain::binary());
  inst.mode = Mode::dichotomous;

  SolutionPool want;
  for (const auto& o : outcomes) want.add(Solution{o, {}, 0.0});
  for (long mask = 0; mask < (1L << n); ++mask) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = (mask >> i) & 1 ? 1.0 : 0.0;
    if (!want.contains_x(x)) inst.rows.push_back(no_good_cut(x, n));
  }
  return inst;
}

}  // namespace fairlot
