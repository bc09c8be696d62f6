#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairlot/ops.hpp"

namespace fairlot {

/// Split of the agents into always-selected (Y), never-selected (N) and
/// sometimes-selected (M) across the (near-)optimal solution set.
struct AgentPartition {
  std::vector<int> always;     // Y
  std::vector<int> never;      // N
  std::vector<int> sometimes;  // M
  int solver_calls = 0;
  SolutionPool witness_pool;
};

/// Utopia and dystopia utility vectors over the optimal set (cardinal mode).
struct Bounds {
  std::vector<double> utopia;
  std::vector<double> dystopia;
  std::vector<int> varying;  // agents with utopia > dystopia

  double range(int i) const { return utopia[i] - dystopia[i]; }
};

/// Classify every agent by solving at most n+1 probe ILPs, each the original
/// instance plus the optimality bound and a single flipped agent value. Any
/// witness solution found along the way that already shows both values of an
/// agent lets that agent skip its probe.
inline AgentPartition partition_agents(const IlpInstance& inst, double z_star,
                                       const SolverConfig& config = {},
                                       const NearOptConfig& near = {},
                                       SolverBackend& backend = builtin_backend()) {
  config.validate();
  if (inst.mode != Mode::dichotomous)
    throw Error("partition_agents: requires dichotomous mode");
  AgentPartition part;
  part.witness_pool.z_star = z_star;

  IlpInstance bounded = with_optimality_bound(inst, z_star, near);
  double bound_rhs = optimality_bound_rhs(z_star, near);
  std::vector<bool> mask = integer_mask(bounded);

  MipOptions probe_opt = mip_options(config);
  probe_opt.stop_first_incumbent = true;  // feasibility is all a probe needs
  probe_opt.bound_abort = bound_rhs - config.omega;

  // Reference optimum.
  MipSolution first = backend.solve_mip(build_lp(bounded), mask, probe_opt);
  ++part.solver_calls;
  if (!first.feasible()) throw InfeasibleError("partition_agents: no optimal solution found");
  Solution ref = split_solution(inst, first.x);
  part.witness_pool.add(ref);

  auto seen_value = [&](int agent, double val) {
    for (const auto& s : part.witness_pool.solutions())
      if (std::abs(s.x[agent] - val) < 0.5) return true;
    return false;
  };

  for (int i = 0; i < inst.n_agents; ++i) {
    double ref_val = std::round(ref.x[i]);
    double flipped = 1.0 - ref_val;
    if (seen_value(i, flipped)) {
      part.sometimes.push_back(i);
      continue;
    }
    IlpInstance probe = bounded;
    probe.agent_domain[i].lo = flipped;
    probe.agent_domain[i].hi = flipped;
    MipSolution res = backend.solve_mip(build_lp(probe), mask, probe_opt);
    ++part.solver_calls;
    if (res.feasible()) {
      part.sometimes.push_back(i);
      part.witness_pool.add(split_solution(inst, res.x));
    } else if (ref_val == 1.0) {
      part.always.push_back(i);
    } else {
      part.never.push_back(i);
    }
  }
  return part;
}

/// Utopia/dystopia bounds. Dichotomous instances degenerate to the Y/N/M
/// partition; cardinal instances take up to 2n pricing solves over the
/// equality-bounded instance.
inline Bounds compute_bounds(const IlpInstance& inst, double z_star,
                             const SolverConfig& config = {},
                             SolutionPool* witnesses = nullptr,
                             SolverBackend& backend = builtin_backend()) {
  config.validate();
  Bounds b;
  b.utopia.assign(inst.n_agents, 0.0);
  b.dystopia.assign(inst.n_agents, 0.0);

  if (inst.mode == Mode::dichotomous) {
    AgentPartition part = partition_agents(inst, z_star, config, {}, backend);
    for (int i : part.always) b.utopia[i] = b.dystopia[i] = 1.0;
    for (int i : part.sometimes) {
      b.utopia[i] = 1.0;
      b.dystopia[i] = 0.0;
    }
    b.varying = part.sometimes;
    if (witnesses) witnesses->merge(part.witness_pool);
    return b;
  }

  for (int i = 0; i < inst.n_agents; ++i) {
    PricingResult hi = solve_pricing(inst, z_star, {{i, 1.0}}, 0.0, true, config, {}, backend);
    PricingResult lo = solve_pricing(inst, z_star, {{i, 1.0}}, 0.0, false, config, {}, backend);
    b.utopia[i] = hi.value;
    b.dystopia[i] = lo.value;
    if (witnesses) {
      witnesses->z_star = z_star;
      witnesses->add(hi.solution);
      witnesses->add(lo.solution);
    }
    if (b.utopia[i] - b.dystopia[i] > config.omega) b.varying.push_back(i);
  }
  return b;
}

}  // namespace fairlot
