#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "fairlot/backend.hpp"
#include "fairlot/model.hpp"

namespace fairlot {

struct OptimalResult {
  Solution solution;
  double z_star = 0.0;
};

inline MipOptions mip_options(const SolverConfig& config) {
  MipOptions opt;
  opt.time_limit_s = config.time_limit_s;
  opt.max_nodes = config.max_nodes;
  if (config.objective_abort_threshold) opt.bound_abort = config.objective_abort_threshold;
  return opt;
}

/// Solve the instance to optimality and return one optimal solution with z*.
inline OptimalResult solve_optimal(const IlpInstance& inst, const SolverConfig& config = {},
                                   SolverBackend& backend = builtin_backend()) {
  config.validate();
  inst.validate();
  MipSolution res = backend.solve_mip(build_lp(inst), integer_mask(inst), mip_options(config));
  switch (res.status) {
    case MipStatus::optimal:
      break;
    case MipStatus::infeasible:
    case MipStatus::bound_abort:
      throw InfeasibleError("solve_optimal: instance is infeasible");
    case MipStatus::unbounded:
      throw UnboundedError("solve_optimal: instance is unbounded");
    default:
      throw TimeLimitError("solve_optimal: solve limit reached before optimality");
  }
  Solution s = split_solution(inst, res.x);
  return {s, s.objective};
}

/// Restrict the instance to solutions within the near-optimality bound: one
/// extra row over the full objective. With epsilon = 0 and no slack the row
/// pins the objective to z* exactly.
inline IlpInstance with_optimality_bound(const IlpInstance& inst, double z_star,
                                         const NearOptConfig& near = {}) {
  if (near.epsilon < 0.0 || near.epsilon >= 1.0)
    throw InvalidEpsilonError("with_optimality_bound: epsilon must lie in [0, 1)");
  if (near.absolute_slack < 0.0)
    throw InvalidEpsilonError("with_optimality_bound: absolute_slack must be >= 0");
  IlpInstance out = inst;
  LinearRow row;
  for (int i = 0; i < inst.n_agents; ++i)
    if (inst.agent_objective[i] != 0.0) row.coeffs.push_back({i, inst.agent_objective[i]});
  for (int j = 0; j < inst.aux_count(); ++j)
    if (inst.aux_objective[j] != 0.0)
      row.coeffs.push_back({inst.n_agents + j, inst.aux_objective[j]});
  if (near.exact()) {
    row.rel = Rel::eq;
    row.rhs = z_star;
  } else {
    row.rel = Rel::ge;
    row.rhs = z_star > 0.0 ? (1.0 - near.epsilon) * z_star
                           : z_star - near.epsilon * std::abs(z_star) - near.absolute_slack;
  }
  out.rows.push_back(std::move(row));
  return out;
}

inline double optimality_bound_rhs(double z_star, const NearOptConfig& near) {
  if (near.exact()) return z_star;
  return z_star > 0.0 ? (1.0 - near.epsilon) * z_star
                      : z_star - near.epsilon * std::abs(z_star) - near.absolute_slack;
}

struct PricingResult {
  Solution solution;
  double value = 0.0;  // optimized weighted sum plus the constant
};

/// Optimize sum(weights_i * x_i) + constant over the optimality-bounded
/// instance. Used as the pricing problem of the column generation engines and
/// for utopia/dystopia bounds.
inline PricingResult solve_pricing(const IlpInstance& inst, double z_star,
                                   const std::vector<std::pair<int, double>>& agent_weights,
                                   double constant, bool maximize_sense,
                                   const SolverConfig& config = {}, const NearOptConfig& near = {},
                                   SolverBackend& backend = builtin_backend()) {
  config.validate();
  IlpInstance bounded = with_optimality_bound(inst, z_star, near);
  LinearProgram lp = build_lp(bounded);
  lp.maximize = maximize_sense;
  std::fill(lp.objective.begin(), lp.objective.end(), 0.0);
  for (auto [i, w] : agent_weights) {
    if (i < 0 || i >= inst.n_agents)
      throw DimensionMismatchError("solve_pricing: agent weight index out of range");
    lp.objective[i] += w;
  }
  MipOptions opt = mip_options(config);
  opt.bound_abort.reset();  // pricing needs true optimality
  MipSolution res = backend.solve_mip(lp, integer_mask(bounded), opt);
  if (res.status == MipStatus::infeasible)
    throw InfeasibleError("solve_pricing: optimality-bounded instance infeasible (wrong z*?)");
  if (res.status != MipStatus::optimal)
    throw TimeLimitError("solve_pricing: solve limit reached before optimality");
  PricingResult out;
  out.solution = split_solution(inst, res.x);
  out.value = res.objective + constant;
  return out;
}

/// True iff the lottery over the pool realizes d within tol.
inline bool realizes(const SolutionPool& pool, const Lottery& lottery, const Distribution& d,
                     double tol) {
  if (lottery.size() != pool.size())
    throw DimensionMismatchError("realizes: lottery does not align with pool");
  if (!pool.empty() && d.size() != static_cast<int>(pool[0].x.size()))
    throw DimensionMismatchError("realizes: distribution length mismatch");
  double total = 0.0;
  for (double w : lottery.weights) {
    if (w < -tol) return false;
    total += w;
  }
  if (std::abs(total - 1.0) > tol) return false;
  for (int i = 0; i < d.size(); ++i) {
    double v = 0.0;
    for (int s = 0; s < pool.size(); ++s) v += lottery.weights[s] * pool[s].x[i];
    if (std::abs(v - d[i]) > tol) return false;
  }
  return true;
}

inline Distribution realized_distribution(const SolutionPool& pool, const Lottery& lottery) {
  if (lottery.size() != pool.size())
    throw DimensionMismatchError("realized_distribution: lottery does not align with pool");
  if (pool.empty()) throw EmptyPoolError("realized_distribution: empty pool");
  Distribution d;
  d.values.assign(pool[0].x.size(), 0.0);
  for (int s = 0; s < pool.size(); ++s)
    for (size_t i = 0; i < d.values.size(); ++i) d.values[i] += lottery.weights[s] * pool[s].x[i];
  return d;
}

/// Carathéodory support reduction: find a vertex of the polytope
/// { lambda >= 0, sum lambda = 1, sum lambda x^s = d } realizing the same
/// distribution with at most |M|+1 positive weights.
inline Lottery reduce_support(const SolutionPool& pool, const Lottery& lottery,
                              SolverBackend& backend = builtin_backend()) {
  if (lottery.size() != pool.size())
    throw DimensionMismatchError("reduce_support: lottery does not align with pool");
  if (pool.empty()) throw EmptyPoolError("reduce_support: empty pool");
  double total = 0.0;
  for (double w : lottery.weights) {
    if (w < -1e-7) throw NotRealizableError("reduce_support: negative lottery weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-7)
    throw NotRealizableError("reduce_support: lottery weights do not sum to one");

  Distribution d = realized_distribution(pool, lottery);
  int n = d.size();
  LinearProgram lp;
  for (int s = 0; s < pool.size(); ++s) lp.add_var(0.0, 0.0, kInf);
  for (int i = 0; i < n; ++i) {
    LinearRow row;
    for (int s = 0; s < pool.size(); ++s)
      if (pool[s].x[i] != 0.0) row.coeffs.push_back({s, pool[s].x[i]});
    row.rel = Rel::eq;
    row.rhs = d[i];
    lp.rows.push_back(std::move(row));
  }
  LinearRow conv;
  for (int s = 0; s < pool.size(); ++s) conv.coeffs.push_back({s, 1.0});
  conv.rel = Rel::eq;
  conv.rhs = 1.0;
  lp.rows.push_back(std::move(conv));

  LpSolution res = backend.solve_lp(lp, SimplexOptions{});
  if (!res.ok()) throw NotRealizableError("reduce_support: vertex search failed");
  Lottery out;
  out.weights.resize(pool.size());
  double mass = 0.0;
  for (int s = 0; s < pool.size(); ++s) {
    out.weights[s] = std::max(0.0, res.x[s]);
    mass += out.weights[s];
  }
  for (double& w : out.weights) w /= mass;
  return out;
}

}  // namespace fairlot
