#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fairlot/colgen.hpp"
#include "fairlot/ops.hpp"
#include "fairlot/partition.hpp"
#include "fairlot/rng.hpp"

namespace fairlot {

/// Objective perturbations 1/2, 1/4, ... for one block of dictators. Both
/// sufficiency conditions hold by construction: the deltas sum below one and
/// each delta exceeds the sum of all later ones.
struct PerturbationVector {
  std::vector<double> deltas;
  int block_size = 0;

  static int block_size_for(double omega) {
    return static_cast<int>(std::floor(-std::log2(omega)));
  }

  static PerturbationVector make(int count) {
    PerturbationVector p;
    p.block_size = count;
    p.deltas.resize(count);
    double d = 0.5;
    for (int k = 0; k < count; ++k, d *= 0.5) p.deltas[k] = d;
    return p;
  }

  double sum() const {
    double s = 0.0;
    for (double d : deltas) s += d;
    return s;
  }
};

/// Serial dictatorship, iterative implementation: walk the ordering, keep the
/// constraint x_sigma(i) = 1 whenever the optimum survives it. The final
/// x-projection is uniquely determined by sigma.
inline Solution serial_dictatorship(const IlpInstance& inst, double z_star,
                                    const std::vector<int>& sigma, const SolverConfig& config = {},
                                    const NearOptConfig& near = {},
                                    SolverBackend& backend = builtin_backend()) {
  config.validate();
  if (inst.mode != Mode::dichotomous)
    throw Error("serial_dictatorship: requires dichotomous mode (see the cardinal variant)");
  IlpInstance work = with_optimality_bound(inst, z_star, near);
  std::vector<bool> mask = integer_mask(work);
  MipOptions opt = mip_options(config);
  opt.stop_first_incumbent = true;
  opt.bound_abort = optimality_bound_rhs(z_star, near) - config.omega;

  std::optional<Solution> current;
  for (int agent : sigma) {
    IlpInstance probe = work;
    probe.agent_domain[agent].lo = 1.0;
    probe.agent_domain[agent].hi = 1.0;
    MipSolution res = backend.solve_mip(build_lp(probe), mask, opt);
    if (res.feasible()) {
      work = std::move(probe);
      current = split_solution(inst, res.x);
    }
  }
  if (!current) {
    MipSolution res = backend.solve_mip(build_lp(work), mask, opt);
    if (!res.feasible()) throw InfeasibleError("serial_dictatorship: no optimal solution");
    current = split_solution(inst, res.x);
  }
  for (double& v : current->x) v = std::round(v);
  return *current;
}

/// Cardinal serial dictatorship: each dictator in turn keeps only the optimal
/// solutions maximizing their own utility, realized by fixing the achieved
/// value within an omega band.
inline Solution serial_dictatorship_cardinal(const IlpInstance& inst, double z_star,
                                             const std::vector<int>& sigma, const Bounds& bounds,
                                             const SolverConfig& config = {},
                                             const NearOptConfig& near = {},
                                             SolverBackend& backend = builtin_backend()) {
  config.validate();
  IlpInstance work = inst;
  Solution current;
  bool have = false;
  for (int agent : sigma) {
    if (bounds.range(agent) <= config.omega) continue;  // nothing to decide
    PricingResult res =
        solve_pricing(work, z_star, {{agent, 1.0}}, 0.0, true, config, near, backend);
    current = res.solution;
    have = true;
    work.agent_domain[agent].lo = std::max(work.agent_domain[agent].lo, res.value - config.omega);
    work.agent_domain[agent].hi = std::min(work.agent_domain[agent].hi, res.value + config.omega);
  }
  if (!have) {
    OptimalResult base = solve_optimal(work, config, backend);
    current = base.solution;
  }
  return current;
}

/// Perturbation implementation of serial dictatorship: add 1/2^k to the
/// objective coefficient of the k-th dictator and solve once. Requires
/// integer objective data and integer variables; orderings longer than the
/// precision budget are processed in fixed blocks.
inline Solution rsd_perturbation(const IlpInstance& inst, const std::vector<int>& sigma,
                                 const SolverConfig& config = {},
                                 SolverBackend& backend = builtin_backend()) {
  config.validate();
  for (double v : inst.agent_objective)
    if (std::abs(v - std::round(v)) > 1e-9)
      throw NonIntegerObjectiveError("rsd_perturbation: agent objective is not integer");
  for (double w : inst.aux_objective)
    if (std::abs(w - std::round(w)) > 1e-9)
      throw NonIntegerObjectiveError("rsd_perturbation: aux objective is not integer");
  for (const auto& d : inst.agent_domain)
    if (!d.integral) throw NonIntegerObjectiveError("rsd_perturbation: continuous agent variable");
  for (const auto& d : inst.aux_domain)
    if (!d.integral) throw NonIntegerObjectiveError("rsd_perturbation: continuous aux variable");

  int block = std::max(1, PerturbationVector::block_size_for(config.omega));
  IlpInstance work = inst;
  std::vector<bool> mask = integer_mask(inst);
  MipOptions opt = mip_options(config);
  opt.bound_abort.reset();

  Solution last;
  bool have = false;
  for (size_t start = 0; start < sigma.size(); start += block) {
    size_t stop = std::min(sigma.size(), start + block);
    PerturbationVector pert = PerturbationVector::make(static_cast<int>(stop - start));
    LinearProgram lp = build_lp(work);
    for (size_t k = start; k < stop; ++k) lp.objective[sigma[k]] += pert.deltas[k - start];
    MipSolution res = backend.solve_mip(lp, mask, opt);
    if (res.status != MipStatus::optimal)
      throw InfeasibleError("rsd_perturbation: perturbed solve failed");
    last = split_solution(inst, res.x);
    have = true;
    for (size_t k = start; k < stop; ++k) {
      double v = std::round(last.x[sigma[k]]);
      work.agent_domain[sigma[k]].lo = v;
      work.agent_domain[sigma[k]].hi = v;
    }
  }
  if (!have) {
    OptimalResult base = solve_optimal(inst, config, backend);
    last = base.solution;
  }
  for (size_t i = 0; i < last.x.size(); ++i) last.x[i] = std::round(last.x[i]);
  return last;
}

struct RsdMode {
  bool exact = false;
  long trials = 1000;
  int exact_limit = 7;  // |M|! solver sweeps beyond this are refused

  static RsdMode exact_mode() { return {true, 0, 7}; }
  static RsdMode sample(long trials) { return {false, trials, 7}; }
};

/// The RSD distribution: the average serial-dictatorship outcome over all
/// orderings (exact) or over sampled orderings with reported standard errors.
inline RuleReport rsd_distribution(const IlpInstance& inst, double z_star,
                                   const std::vector<int>& M, const RsdMode& mode,
                                   const SolverConfig& config = {}, const NearOptConfig& near = {},
                                   SolverBackend& backend = builtin_backend()) {
  config.validate();
  detail::Stopwatch clock;
  RuleReport rep;
  rep.rule = mode.exact ? "rsd-exact" : "rsd-sample";
  rep.pool.z_star = z_star;

  std::optional<Bounds> bounds;
  if (inst.mode == Mode::cardinal) bounds = compute_bounds(inst, z_star, config, nullptr, backend);

  auto run_sd = [&](const std::vector<int>& sigma) {
    return inst.mode == Mode::dichotomous
               ? serial_dictatorship(inst, z_star, sigma, config, near, backend)
               : serial_dictatorship_cardinal(inst, z_star, sigma, *bounds, config, near, backend);
  };

  int n = inst.n_agents;
  std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
  std::vector<long> outcome_counts;
  long total = 0;

  auto record = [&](const Solution& s) {
    int id = rep.pool.add(s);
    if (id == static_cast<int>(outcome_counts.size())) outcome_counts.push_back(0);
    ++outcome_counts[id];
    ++total;
    for (int i = 0; i < n; ++i) {
      sum[i] += s.x[i];
      sumsq[i] += s.x[i] * s.x[i];
    }
  };

  if (mode.exact) {
    if (static_cast<int>(M.size()) > mode.exact_limit)
      throw TooLargeForExactError("rsd_distribution: |M| exceeds the exact-mode limit");
    std::vector<int> sigma = M;
    std::sort(sigma.begin(), sigma.end());
    if (sigma.empty()) {
      record(run_sd(sigma));
    } else {
      do {
        record(run_sd(sigma));
      } while (std::next_permutation(sigma.begin(), sigma.end()));
    }
  } else {
    if (mode.trials < 1) throw ConfigError("rsd_distribution: trials must be >= 1");
    for (long t = 0; t < mode.trials; ++t) {
      CounterRng rng(config.seed, static_cast<std::uint64_t>(t));
      std::vector<int> sigma = M;
      rng.shuffle(sigma);
      record(run_sd(sigma));
    }
    rep.approximate = true;
    rep.std_error.resize(n);
    for (int i = 0; i < n; ++i) {
      double mean = sum[i] / total;
      double var = std::max(0.0, sumsq[i] / total - mean * mean);
      rep.std_error[i] = std::sqrt(var / total);
    }
  }

  rep.distribution.values.resize(n);
  for (int i = 0; i < n; ++i) rep.distribution.values[i] = sum[i] / total;
  rep.lottery.weights.resize(rep.pool.size());
  for (int s = 0; s < rep.pool.size(); ++s)
    rep.lottery.weights[s] = static_cast<double>(outcome_counts[s]) / total;
  rep.iterations = static_cast<int>(total);
  rep.wall_time_s = clock.seconds();
  return rep;
}

enum class HeuristicKind { reindex, perturb };

/// Baseline heuristics: re-index permutes the order in which agent variables
/// enter the solver; perturb jitters every agent's objective coefficient and
/// (by default) rejects draws that lose optimality for the true objective.
inline RuleReport heuristic(const IlpInstance& inst, HeuristicKind kind, long trials,
                            std::uint64_t seed, const SolverConfig& config = {},
                            std::optional<double> z_star = {}, bool keep_raw = false,
                            SolverBackend& backend = builtin_backend()) {
  config.validate();
  if (trials < 1) throw ConfigError("heuristic: trials must be >= 1");
  detail::Stopwatch clock;
  RuleReport rep;
  rep.rule = kind == HeuristicKind::reindex ? "reindex" : "perturb";
  rep.approximate = true;

  double z = z_star ? *z_star : solve_optimal(inst, config, backend).z_star;
  rep.pool.z_star = z;
  std::vector<bool> mask = integer_mask(inst);
  MipOptions opt = mip_options(config);
  opt.bound_abort.reset();

  double amp = 0.0;
  for (double v : inst.agent_objective) amp += v;
  amp = std::abs(amp) / std::max(1, inst.n_agents);

  int n = inst.n_agents;
  std::vector<double> sum(n, 0.0);
  std::vector<long> outcome_counts;
  long total = 0, rejected = 0;

  auto record = [&](const Solution& s) {
    int id = rep.pool.add(s);
    if (id == static_cast<int>(outcome_counts.size())) outcome_counts.push_back(0);
    ++outcome_counts[id];
    ++total;
    for (int i = 0; i < n; ++i) sum[i] += s.x[i];
  };

  for (long t = 0; t < trials; ++t) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    if (kind == HeuristicKind::reindex) {
      std::vector<int> order(n);
      for (int i = 0; i < n; ++i) order[i] = i;
      rng.shuffle(order);
      IlpInstance shuffled = inst;
      std::vector<int> pos(n);
      for (int k = 0; k < n; ++k) {
        shuffled.agent_objective[k] = inst.agent_objective[order[k]];
        shuffled.agent_domain[k] = inst.agent_domain[order[k]];
        pos[order[k]] = k;
      }
      for (auto& row : shuffled.rows)
        for (auto& [j, a] : row.coeffs)
          if (j < n) j = pos[j];
      MipSolution res = backend.solve_mip(build_lp(shuffled), mask, opt);
      if (res.status != MipStatus::optimal)
        throw InfeasibleError("heuristic: reindex solve failed");
      std::vector<double> unshuffled = res.x;
      for (int k = 0; k < n; ++k) unshuffled[order[k]] = res.x[k];
      Solution s = split_solution(inst, unshuffled);
      if (inst.mode == Mode::dichotomous)
        for (double& v : s.x) v = std::round(v);
      record(s);
    } else {
      const int redraw_limit = 200;
      for (int attempt = 0;; ++attempt) {
        LinearProgram lp = build_lp(inst);
        for (int i = 0; i < n; ++i) lp.objective[i] += rng.uniform(-amp, amp);
        MipSolution res = backend.solve_mip(lp, mask, opt);
        if (res.status != MipStatus::optimal)
          throw InfeasibleError("heuristic: perturb solve failed");
        Solution s = split_solution(inst, res.x);
        if (inst.mode == Mode::dichotomous)
          for (double& v : s.x) v = std::round(v);
        if (keep_raw || s.objective >= z - config.omega) {
          record(s);
          break;
        }
        ++rejected;
        if (attempt >= redraw_limit) {  // keep the trial count honest
          record(s);
          break;
        }
      }
    }
  }

  rep.distribution.values.resize(n);
  for (int i = 0; i < n; ++i) rep.distribution.values[i] = sum[i] / total;
  rep.lottery.weights.resize(rep.pool.size());
  for (int s = 0; s < rep.pool.size(); ++s)
    rep.lottery.weights[s] = static_cast<double>(outcome_counts[s]) / total;
  rep.iterations = static_cast<int>(total);
  rep.rejected = rejected;
  rep.wall_time_s = clock.seconds();
  return rep;
}

/// Draw one ordering uniformly and run serial dictatorship: an implementation
/// that samples a single solution from the RSD lottery.
inline Solution rsd_sample_one(const IlpInstance& inst, double z_star, const std::vector<int>& M,
                               std::uint64_t seed, const SolverConfig& config = {},
                               const NearOptConfig& near = {},
                               SolverBackend& backend = builtin_backend()) {
  CounterRng rng(seed);
  std::vector<int> sigma = M;
  rng.shuffle(sigma);
  if (inst.mode == Mode::dichotomous)
    return serial_dictatorship(inst, z_star, sigma, config, near, backend);
  Bounds b = compute_bounds(inst, z_star, config, nullptr, backend);
  return serial_dictatorship_cardinal(inst, z_star, sigma, b, config, near, backend);
}

}  // namespace fairlot
