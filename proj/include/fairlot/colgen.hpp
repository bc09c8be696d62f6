#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "fairlot/ops.hpp"
#include "fairlot/partition.hpp"

namespace fairlot {

namespace detail {

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// Shared machinery of the leximin upper/lower masters: one LP over the
// current columns, plus per-agent dual bookkeeping for the pricing objective.
class LeximinMaster {
 public:
  LeximinMaster(const SolutionPool& pool, const std::vector<int>& free,
                const std::vector<std::pair<int, double>>& fixed, const std::vector<double>& lo,
                const std::vector<double>& range, double band)
      : pool_(pool), free_(free), fixed_(fixed), lo_(lo), range_(range), band_(band) {}

  // Upper problem: maximize the common lower bound gamma.
  LpSolution solve_upper(SolverBackend& backend) {
    build_base(/*gamma_objective=*/true);
    for (size_t fi = 0; fi < free_.size(); ++fi) {
      int i = free_[fi];
      LinearRow row = agent_row(i);
      row.coeffs.push_back({scalar_var_, -range_[i]});
      row.rel = Rel::ge;
      row.rhs = lo_[i];
      agent_of_row_.push_back(i);
      lp_.rows.push_back(std::move(row));
    }
    finish_rows();
    return run(backend);
  }

  // Lower problem for agent j at level gamma: maximize theta.
  LpSolution solve_lower(SolverBackend& backend, int j, double gamma) {
    build_base(/*gamma_objective=*/true);
    {
      LinearRow row = agent_row(j);
      row.coeffs.push_back({scalar_var_, -range_[j]});
      row.rel = Rel::ge;
      row.rhs = lo_[j] + range_[j] * gamma;
      agent_of_row_.push_back(j);
      lp_.rows.push_back(std::move(row));
    }
    for (size_t fi = 0; fi < free_.size(); ++fi) {
      int i = free_[fi];
      LinearRow row = agent_row(i);
      row.rel = Rel::ge;
      row.rhs = lo_[i] + range_[i] * gamma;
      agent_of_row_.push_back(i);
      lp_.rows.push_back(std::move(row));
    }
    finish_rows();
    return run(backend);
  }

  // Pricing weights from the duals of the last solve: weight_i collects every
  // row about agent i, the constant is minus the convexity dual.
  std::pair<std::vector<std::pair<int, double>>, double> pricing_terms(
      const LpSolution& sol) const {
    std::vector<std::pair<int, double>> weights;
    std::vector<double> acc(lo_.size(), 0.0);
    std::vector<bool> touched(lo_.size(), false);
    for (size_t r = 0; r < agent_of_row_.size(); ++r) {
      int i = agent_of_row_[r];
      if (i < 0) continue;
      acc[i] += sol.row_duals[r];
      touched[i] = true;
    }
    for (size_t i = 0; i < acc.size(); ++i)
      if (touched[i]) weights.push_back({static_cast<int>(i), -acc[i]});
    double constant = -sol.row_duals[convexity_row_];
    return {std::move(weights), constant};
  }

  Lottery lottery(const LpSolution& sol) const {
    Lottery lot;
    lot.weights.assign(sol.x.begin(), sol.x.begin() + pool_.size());
    for (double& w : lot.weights) w = std::max(0.0, w);
    double mass = 0.0;
    for (double w : lot.weights) mass += w;
    if (mass > 0)
      for (double& w : lot.weights) w /= mass;
    return lot;
  }

 private:
  const SolutionPool& pool_;
  const std::vector<int>& free_;
  const std::vector<std::pair<int, double>>& fixed_;
  const std::vector<double>& lo_;
  const std::vector<double>& range_;
  double band_;

  LinearProgram lp_;
  int scalar_var_ = -1;
  int convexity_row_ = -1;
  std::vector<int> agent_of_row_;  // -1 for convexity / band rows counted via agent id

  LinearRow agent_row(int i) const {
    LinearRow row;
    for (int s = 0; s < pool_.size(); ++s)
      if (pool_[s].x[i] != 0.0) row.coeffs.push_back({s, pool_[s].x[i]});
    return row;
  }

  void build_base(bool gamma_objective) {
    lp_ = LinearProgram{};
    agent_of_row_.clear();
    for (int s = 0; s < pool_.size(); ++s) lp_.add_var(0.0, 0.0, kInf);
    scalar_var_ = lp_.add_var(gamma_objective ? 1.0 : 0.0, 0.0, 1.0);
  }

  void finish_rows() {
    for (auto [i, val] : fixed_) {
      LinearRow up = agent_row(i);
      up.rel = Rel::le;
      up.rhs = val + band_;
      agent_of_row_.push_back(i);
      lp_.rows.push_back(std::move(up));
      LinearRow down = agent_row(i);
      down.rel = Rel::ge;
      down.rhs = val - band_;
      agent_of_row_.push_back(i);
      lp_.rows.push_back(std::move(down));
    }
    LinearRow conv;
    for (int s = 0; s < pool_.size(); ++s) conv.coeffs.push_back({s, 1.0});
    conv.rel = Rel::eq;
    conv.rhs = 1.0;
    convexity_row_ = static_cast<int>(lp_.rows.size());
    agent_of_row_.push_back(-1);
    lp_.rows.push_back(std::move(conv));
  }

  LpSolution run(SolverBackend& backend) {
    LpSolution sol = backend.solve_lp(lp_, SimplexOptions{});
    if (!sol.ok()) throw NonConvergenceError("leximin: master LP did not solve");
    return sol;
  }
};

}  // namespace detail

/// Leximin distribution by column generation: in every stage, raise the
/// common floor of the still-free agents as far as pricing allows, then pin
/// the agents that cannot move past it. With normalization the floors are the
/// fractions of the utopia-dystopia range (lexicographic Kalai-Smorodinsky).
inline RuleReport leximin(const IlpInstance& inst, double z_star, const std::vector<int>& M,
                          const SolutionPool& init_pool,
                          const std::optional<Bounds>& normalization = {},
                          const SolverConfig& config = {}, const NearOptConfig& near = {},
                          SolverBackend& backend = builtin_backend(), bool first_stage_only = false) {
  config.validate();
  detail::Stopwatch clock;
  RuleReport rep;
  rep.rule = first_stage_only ? "maximin" : "leximin";
  rep.pool = init_pool;
  rep.pool.z_star = z_star;

  int n = inst.n_agents;
  std::vector<double> lo(n, 0.0), range(n, 1.0);
  if (normalization) {
    lo = normalization->dystopia;
    for (int i = 0; i < n; ++i) range[i] = std::max(normalization->range(i), 1e-12);
  }

  if (rep.pool.empty()) {
    OptimalResult base = solve_optimal(inst, config, backend);
    rep.pool.add(base.solution);
  }
  for (int i : M) {
    bool covered = false;
    for (const auto& s : rep.pool.solutions())
      if (s.x[i] > lo[i] + 1e-9) covered = true;
    if (!covered)
      throw CoverageError("leximin: initial pool does not cover agent " + std::to_string(i));
  }

  std::vector<int> free = M;
  std::vector<std::pair<int, double>> fixed;
  Lottery last_lottery;
  last_lottery.weights.assign(rep.pool.size(), 0.0);
  if (!last_lottery.weights.empty()) last_lottery.weights[0] = 1.0;

  while (!free.empty()) {
    ++rep.iterations;
    // Upper problem with pricing.
    double gamma = 0.0;
    while (true) {
      detail::LeximinMaster master(rep.pool, free, fixed, lo, range, config.master_band);
      LpSolution sol = master.solve_upper(backend);
      ++rep.master_solves;
      gamma = sol.objective;
      last_lottery = master.lottery(sol);
      auto [weights, constant] = master.pricing_terms(sol);
      PricingResult priced =
          solve_pricing(inst, z_star, weights, constant, true, config, near, backend);
      ++rep.pricing_calls;
      if (priced.value <= config.reduced_cost_tol) break;
      if (rep.pool.contains_x(priced.solution.x)) break;  // numerically stalled
      rep.pool.add(priced.solution);
      last_lottery.weights.push_back(0.0);
    }
    if (rep.iterations == 1) rep.first_stage_value = gamma;
    if (first_stage_only) break;

    // Lower problems: which agents are stuck exactly at gamma?
    std::vector<int> still;
    for (int j : free) {
      double theta = 0.0;
      while (true) {
        detail::LeximinMaster master(rep.pool, free, fixed, lo, range, config.master_band);
        LpSolution sol = master.solve_lower(backend, j, gamma);
        ++rep.master_solves;
        theta = sol.objective;
        last_lottery = master.lottery(sol);
        auto [weights, constant] = master.pricing_terms(sol);
        PricingResult priced =
            solve_pricing(inst, z_star, weights, constant, true, config, near, backend);
        ++rep.pricing_calls;
        if (priced.value <= config.reduced_cost_tol) break;
        if (rep.pool.contains_x(priced.solution.x)) break;
        rep.pool.add(priced.solution);
        last_lottery.weights.push_back(0.0);
      }
      if (theta <= config.omega) {
        fixed.push_back({j, lo[j] + range[j] * gamma});
      } else {
        still.push_back(j);
      }
    }
    if (still.size() == free.size())
      throw NonConvergenceError("leximin: stage fixed no agent");
    free = std::move(still);
  }

  last_lottery.weights.resize(rep.pool.size(), 0.0);
  rep.lottery = last_lottery;
  rep.distribution = rep.pool.empty() ? Distribution{} : realized_distribution(rep.pool, rep.lottery);
  for (auto [i, val] : fixed) rep.distribution.values[i] = val;
  rep.wall_time_s = clock.seconds();
  return rep;
}

/// First leximin stage only: the maximin distribution and its value.
inline RuleReport maximin(const IlpInstance& inst, double z_star, const std::vector<int>& M,
                          const SolutionPool& init_pool,
                          const std::optional<Bounds>& normalization = {},
                          const SolverConfig& config = {}, const NearOptConfig& near = {},
                          SolverBackend& backend = builtin_backend()) {
  return leximin(inst, z_star, M, init_pool, normalization, config, near, backend,
                 /*first_stage_only=*/true);
}

/// Convex separable objective over the distribution restricted to M.
/// Arguments are the utility gains over the dystopia point; `divide_by_range`
/// rescales them by the utopia-dystopia range (the same optimizer either
/// way, but reported objective values differ).
struct ConvexObjective {
  enum class Kind { nash, knorm, custom };
  Kind kind = Kind::nash;
  double k = 2.0;
  std::optional<Bounds> normalization;
  bool divide_by_range = false;
  double floor = 1e-9;
  std::function<double(const std::vector<double>&)> custom_value;
  std::function<std::vector<double>(const std::vector<double>&)> custom_gradient;

  static ConvexObjective nash(std::optional<Bounds> norm = {}, bool divide = false) {
    ConvexObjective o;
    o.kind = Kind::nash;
    o.normalization = std::move(norm);
    o.divide_by_range = divide;
    return o;
  }
  static ConvexObjective knorm(double k, std::optional<Bounds> norm = {}) {
    ConvexObjective o;
    o.kind = Kind::knorm;
    o.k = k;
    o.normalization = std::move(norm);
    o.divide_by_range = true;
    return o;
  }

  double lo(int agent) const { return normalization ? normalization->dystopia[agent] : 0.0; }
  double range(int agent) const {
    return normalization ? std::max(normalization->range(agent), 1e-12) : 1.0;
  }

  // Value at the distribution restricted to agents M; +inf when the floor is
  // breached (line searches back off rather than fail).
  double value(const std::vector<int>& M, const std::vector<double>& dM) const {
    std::vector<double> args(M.size());
    for (size_t mi = 0; mi < M.size(); ++mi) {
      args[mi] = dM[mi] - lo(M[mi]);
      if (divide_by_range) args[mi] /= range(M[mi]);
    }
    if (kind == Kind::custom) return custom_value(args);
    double f = 0.0;
    for (double a : args) {
      if (kind == Kind::nash) {
        if (a < floor) return kInf;
        f -= std::log(a);
      } else {
        f += std::pow(std::max(a, 0.0), k);
      }
    }
    return f;
  }

  std::vector<double> gradient(const std::vector<int>& M, const std::vector<double>& dM) const {
    std::vector<double> args(M.size());
    for (size_t mi = 0; mi < M.size(); ++mi) {
      args[mi] = dM[mi] - lo(M[mi]);
      if (divide_by_range) args[mi] /= range(M[mi]);
    }
    std::vector<double> g(M.size());
    if (kind == Kind::custom) {
      g = custom_gradient(args);
    } else {
      for (size_t mi = 0; mi < M.size(); ++mi) {
        if (kind == Kind::nash) {
          if (args[mi] < floor)
            throw GradientUndefinedError("nash objective: argument below floor");
          g[mi] = -1.0 / args[mi];
        } else {
          g[mi] = k * std::pow(std::max(args[mi], 0.0), k - 1.0);
        }
      }
    }
    for (size_t mi = 0; mi < M.size(); ++mi)
      if (divide_by_range) g[mi] /= range(M[mi]);
    return g;
  }
};

namespace detail {

// Monotone FISTA over the lottery simplex with backtracking; stops when the
// projected-gradient residual at unit step falls below `residual_tol`.
class ConvexMaster {
 public:
  ConvexMaster(const SolutionPool& pool, const std::vector<int>& M, const ConvexObjective& obj)
      : pool_(pool), M_(M), obj_(obj) {}

  // Returns the optimal lottery; `warm` may carry a previous iterate.
  std::vector<double> solve(std::vector<double> warm, double residual_tol, long max_iters) {
    int S = pool_.size();
    std::vector<double> lam = std::move(warm);
    if (static_cast<int>(lam.size()) != S) lam.assign(S, 1.0 / S);
    lam = project(lam);
    double f = eval(lam);
    if (!std::isfinite(f)) {
      lam.assign(S, 1.0 / S);
      f = eval(lam);
      if (!std::isfinite(f))
        throw GradientUndefinedError("convex master: no interior starting point");
    }

    std::vector<double> y = lam, prev = lam, g(S);
    double t_momentum = 1.0;
    double step = 1.0;
    for (long it = 0; it < max_iters; ++it) {
      double fy = eval(y);
      if (!std::isfinite(fy)) {  // momentum overshot the domain; restart
        y = lam;
        t_momentum = 1.0;
        fy = f;
      }
      grad(y, g);

      std::vector<double> next;
      double fn = kInf;
      for (int bt = 0; bt < 80; ++bt) {
        next = y;
        for (int s = 0; s < S; ++s) next[s] -= step * g[s];
        next = project(next);
        fn = eval(next);
        double lin = 0.0, quad = 0.0;
        for (int s = 0; s < S; ++s) {
          double d = next[s] - y[s];
          lin += g[s] * d;
          quad += d * d;
        }
        if (std::isfinite(fn) && fn <= fy + lin + quad / (2.0 * step) + 1e-15) break;
        step *= 0.5;
      }

      if (fn <= f) {  // monotone update
        prev = lam;
        lam = next;
        f = fn;
      } else {
        prev = lam;
      }
      double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
      y = lam;
      double beta = (t_momentum - 1.0) / t_next;
      for (int s = 0; s < S; ++s) y[s] += beta * (lam[s] - prev[s]);
      t_momentum = t_next;
      step *= 1.1;

      if ((it & 7) == 0 && residual(lam, g) <= residual_tol) break;
    }
    return lam;
  }

  std::vector<double> distribution_on_M(const std::vector<double>& lam) const {
    std::vector<double> dM(M_.size(), 0.0);
    for (size_t mi = 0; mi < M_.size(); ++mi) {
      int i = M_[mi];
      for (int s = 0; s < pool_.size(); ++s) dM[mi] += lam[s] * pool_[s].x[i];
    }
    return dM;
  }

 private:
  const SolutionPool& pool_;
  const std::vector<int>& M_;
  const ConvexObjective& obj_;

  double eval(const std::vector<double>& lam) const {
    return obj_.value(M_, distribution_on_M(lam));
  }

  void grad(const std::vector<double>& lam, std::vector<double>& out) const {
    std::vector<double> gd = obj_.gradient(M_, distribution_on_M(lam));
    for (int s = 0; s < pool_.size(); ++s) {
      double acc = 0.0;
      for (size_t mi = 0; mi < M_.size(); ++mi) acc += gd[mi] * pool_[s].x[M_[mi]];
      out[s] = acc;
    }
  }

  double residual(const std::vector<double>& lam, std::vector<double>& g) const {
    grad(lam, g);
    std::vector<double> moved = lam;
    for (size_t s = 0; s < moved.size(); ++s) moved[s] -= g[s];
    moved = project(moved);
    double r = 0.0;
    for (size_t s = 0; s < moved.size(); ++s) {
      double d = moved[s] - lam[s];
      r += d * d;
    }
    return std::sqrt(r);
  }

  static std::vector<double> project(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, tau = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
      css += u[i];
      double t = (css - 1.0) / static_cast<double>(i + 1);
      if (u[i] - t > 0) tau = t;
    }
    for (double& x : v) x = std::max(0.0, x - tau);
    return v;
  }
};

}  // namespace detail

/// Minimize a convex objective over the distributions realizable from the
/// optimal set. Restricted masters keep the non-linear objective; pricing
/// minimizes the gradient-weighted selection over the bounded instance, and
/// the run stops when the priced value certifies optimality.
inline RuleReport minimize_convex(const IlpInstance& inst, double z_star,
                                  const std::vector<int>& M, const ConvexObjective& objective,
                                  const SolutionPool& init_pool, const SolverConfig& config = {},
                                  const NearOptConfig& near = {},
                                  SolverBackend& backend = builtin_backend()) {
  config.validate();
  detail::Stopwatch clock;
  RuleReport rep;
  rep.rule = objective.kind == ConvexObjective::Kind::nash    ? "nash"
             : objective.kind == ConvexObjective::Kind::knorm ? "knorm"
                                                              : "custom";
  rep.pool = init_pool;
  rep.pool.z_star = z_star;
  if (rep.pool.empty()) {
    OptimalResult base = solve_optimal(inst, config, backend);
    rep.pool.add(base.solution);
  }
  if (objective.kind == ConvexObjective::Kind::nash) {
    for (int i : M) {
      bool covered = false;
      for (const auto& s : rep.pool.solutions())
        if (s.x[i] > objective.lo(i) + 1e-9) covered = true;
      if (!covered)
        throw CoverageError("minimize_convex: initial pool does not cover agent " +
                            std::to_string(i));
    }
  }

  const double kkt_rel = 1e-6;
  const long master_iters = 300000;
  double master_residual = 1e-8;
  std::vector<double> lam;
  std::vector<double> mu;
  double rho = 0.0;
  int max_columns = 2000;

  for (int round = 0;; ++round) {
    ++rep.iterations;
    detail::ConvexMaster master(rep.pool, M, objective);
    lam.resize(rep.pool.size(), 0.0);
    lam = master.solve(lam, master_residual, master_iters);
    ++rep.master_solves;

    std::vector<double> dM = master.distribution_on_M(lam);
    mu = objective.gradient(M, dM);

    // rho* from the heaviest support column: -rho = sum_i mu_i x_i there.
    int support = 0;
    for (int s = 1; s < rep.pool.size(); ++s)
      if (lam[s] > lam[support]) support = s;
    double lhs = 0.0;
    for (size_t mi = 0; mi < M.size(); ++mi) lhs += mu[mi] * rep.pool[support].x[M[mi]];
    rho = -lhs;

    std::vector<std::pair<int, double>> weights;
    for (size_t mi = 0; mi < M.size(); ++mi) weights.push_back({M[mi], mu[mi]});
    PricingResult priced = solve_pricing(inst, z_star, weights, 0.0, false, config, near, backend);
    ++rep.pricing_calls;

    double slack = priced.value - lhs;  // >= 0 certifies optimality
    rep.condition_slack = slack;
    if (slack >= -kkt_rel * (1.0 + std::abs(rho))) break;
    if (rep.pool.contains_x(priced.solution.x)) {
      // Master not tight enough to separate; solve harder before giving up.
      if (master_residual > 1e-11) {
        master_residual *= 1e-2;
        continue;
      }
      throw NonConvergenceError("minimize_convex: pricing repeated a known column");
    }
    if (round >= max_columns)
      throw NonConvergenceError("minimize_convex: column limit reached");
    rep.pool.add(priced.solution);
    lam.push_back(0.0);
  }

  rep.lottery.weights = lam;
  rep.distribution = realized_distribution(rep.pool, rep.lottery);

  // KKT residuals over the final pool.
  double res = 0.0;
  double mass = 0.0;
  for (double w : lam) {
    mass += w;
    res = std::max(res, std::max(0.0, -w));
  }
  res = std::max(res, std::abs(mass - 1.0));
  for (int s = 0; s < rep.pool.size(); ++s) {
    double nu = rho;
    for (size_t mi = 0; mi < M.size(); ++mi) nu += mu[mi] * rep.pool[s].x[M[mi]];
    res = std::max(res, std::max(0.0, -nu));
    res = std::max(res, std::abs(nu * lam[s]));
  }
  rep.kkt_residual = res;
  rep.wall_time_s = clock.seconds();
  return rep;
}

}  // namespace fairlot
