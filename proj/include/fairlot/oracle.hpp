#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "fairlot/partition.hpp"

namespace fairlot {

/// Exact rule evaluation over an explicitly enumerated, complete pool. These
/// are the reference oracles the column generation engines are tested
/// against; they never touch the pricing machinery.
struct BruteForceRule {
  enum class Kind { leximin, nash, knorm, maximin, rsd_exact };
  Kind kind = Kind::leximin;
  double k = 2.0;  // knorm exponent

  static BruteForceRule leximin() { return {Kind::leximin, 0}; }
  static BruteForceRule nash() { return {Kind::nash, 0}; }
  static BruteForceRule knorm(double k) { return {Kind::knorm, k}; }
  static BruteForceRule maximin() { return {Kind::maximin, 0}; }
  static BruteForceRule rsd_exact() { return {Kind::rsd_exact, 0}; }
};

namespace detail {

struct PoolView {
  int n = 0;
  std::vector<int> varying;            // agents whose column is not constant
  std::vector<double> lo, hi;          // per-agent column min/max
};

inline PoolView analyze_pool(const SolutionPool& pool, const std::optional<Bounds>& norm) {
  if (pool.empty()) throw EmptyPoolError("brute_force_rule: empty pool");
  PoolView v;
  v.n = static_cast<int>(pool[0].x.size());
  v.lo.assign(v.n, kInf);
  v.hi.assign(v.n, -kInf);
  for (const auto& s : pool.solutions())
    for (int i = 0; i < v.n; ++i) {
      v.lo[i] = std::min(v.lo[i], s.x[i]);
      v.hi[i] = std::max(v.hi[i], s.x[i]);
    }
  if (norm) {
    v.lo = norm->dystopia;
    v.hi = norm->utopia;
  }
  for (int i = 0; i < v.n; ++i)
    if (v.hi[i] - v.lo[i] > 1e-9) v.varying.push_back(i);
  return v;
}

// max gamma s.t. sum_s lambda_s x_i >= lo_i + range_i*gamma on free agents,
// fixed agents pinned, lambda in the simplex. Returns gamma* and the lottery.
inline std::pair<double, std::vector<double>> pool_maximin_lp(
    const SolutionPool& pool, const PoolView& view, const std::vector<int>& free,
    const std::vector<std::pair<int, double>>& fixed) {
  int S = pool.size();
  LinearProgram lp;
  for (int s = 0; s < S; ++s) lp.add_var(0.0, 0.0, kInf);
  int gamma = lp.add_var(1.0, 0.0, 1.0);
  for (int i : free) {
    LinearRow row;
    for (int s = 0; s < S; ++s)
      if (pool[s].x[i] != 0.0) row.coeffs.push_back({s, pool[s].x[i]});
    row.coeffs.push_back({gamma, -(view.hi[i] - view.lo[i])});
    row.rel = Rel::ge;
    row.rhs = view.lo[i];
    lp.rows.push_back(std::move(row));
  }
  for (auto [i, val] : fixed) {
    LinearRow row;
    for (int s = 0; s < S; ++s)
      if (pool[s].x[i] != 0.0) row.coeffs.push_back({s, pool[s].x[i]});
    row.rel = Rel::eq;
    row.rhs = val;
    lp.rows.push_back(std::move(row));
  }
  LinearRow conv;
  for (int s = 0; s < S; ++s) conv.coeffs.push_back({s, 1.0});
  conv.rel = Rel::eq;
  conv.rhs = 1.0;
  lp.rows.push_back(std::move(conv));

  LpSolution res = solve_lp(lp);
  if (!res.ok()) throw Error("pool maximin LP failed");
  std::vector<double> lambda(res.x.begin(), res.x.begin() + S);
  return {res.objective, std::move(lambda)};
}

inline Distribution distribution_of(const SolutionPool& pool, const std::vector<double>& lambda) {
  Distribution d;
  d.values.assign(pool[0].x.size(), 0.0);
  for (int s = 0; s < pool.size(); ++s)
    for (size_t i = 0; i < d.values.size(); ++i) d.values[i] += lambda[s] * pool[s].x[i];
  return d;
}

inline Distribution oracle_leximin(const SolutionPool& pool, const PoolView& view) {
  std::vector<int> free = view.varying;
  std::vector<std::pair<int, double>> fixed;
  std::vector<double> lambda;

  while (!free.empty()) {
    auto [gamma, lam] = pool_maximin_lp(pool, view, free, fixed);
    lambda = lam;
    std::vector<int> still;
    for (int j : free) {
      // can agent j exceed gamma while everyone else stays at >= gamma?
      int S = pool.size();
      LinearProgram lp;
      for (int s = 0; s < S; ++s) lp.add_var(0.0, 0.0, kInf);
      int theta = lp.add_var(1.0, 0.0, 1.0);
      for (int i : free) {
        LinearRow row;
        for (int s = 0; s < S; ++s)
          if (pool[s].x[i] != 0.0) row.coeffs.push_back({s, pool[s].x[i]});
        if (i == j) row.coeffs.push_back({theta, -(view.hi[i] - view.lo[i])});
        row.rel = Rel::ge;
        row.rhs = view.lo[i] + (view.hi[i] - view.lo[i]) * gamma;
        lp.rows.push_back(std::move(row));
      }
      for (auto [i, val] : fixed) {
        LinearRow row;
        for (int s = 0; s < S; ++s)
          if (pool[s].x[i] != 0.0) row.coeffs.push_back({s, pool[s].x[i]});
        row.rel = Rel::eq;
        row.rhs = val;
        lp.rows.push_back(std::move(row));
      }
      LinearRow conv;
      for (int s = 0; s < S; ++s) conv.coeffs.push_back({s, 1.0});
      conv.rel = Rel::eq;
      conv.rhs = 1.0;
      lp.rows.push_back(std::move(conv));
      LpSolution res = solve_lp(lp);
      if (!res.ok()) throw Error("oracle leximin: lower LP failed");
      if (res.objective <= 1e-8) {
        fixed.push_back({j, view.lo[j] + (view.hi[j] - view.lo[j]) * gamma});
      } else {
        still.push_back(j);
      }
      lambda.assign(res.x.begin(), res.x.begin() + S);
    }
    if (still.size() == free.size()) throw Error("oracle leximin: no agent fixed");
    free = std::move(still);
  }

  Distribution d = lambda.empty() ? distribution_of(pool, std::vector<double>(pool.size(), 1.0 / pool.size()))
                                  : distribution_of(pool, lambda);
  for (auto [i, val] : fixed) d.values[i] = val;
  return d;
}

// Projected gradient with backtracking over the lottery simplex, with a
// Frank-Wolfe gap certificate. Small pools only.
template <typename F, typename G>
inline std::vector<double> simplex_minimize(int S, F&& value, G&& grad_lambda, int max_iters,
                                            double gap_tol) {
  std::vector<double> lam(S, 1.0 / S);
  auto project = [S](std::vector<double> v) {
    // Euclidean projection onto the simplex
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, tau = 0.0;
    for (int i = 0; i < S; ++i) {
      css += u[i];
      double t = (css - 1.0) / (i + 1);
      if (u[i] - t > 0) tau = t;
    }
    for (double& x : v) x = std::max(0.0, x - tau);
    return v;
  };

  double step = 1.0;
  double f = value(lam);
  std::vector<double> g(S);
  for (int it = 0; it < max_iters; ++it) {
    grad_lambda(lam, g);
    double gdotl = 0.0, gmin = kInf;
    for (int s = 0; s < S; ++s) {
      gdotl += g[s] * lam[s];
      gmin = std::min(gmin, g[s]);
    }
    if (gdotl - gmin <= gap_tol * (1.0 + std::abs(f))) break;

    // backtracking proximal step
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> trial(S);
      for (int s = 0; s < S; ++s) trial[s] = lam[s] - step * g[s];
      trial = project(std::move(trial));
      double ft = value(trial);
      double quad = 0.0, lin = 0.0;
      for (int s = 0; s < S; ++s) {
        double dlt = trial[s] - lam[s];
        lin += g[s] * dlt;
        quad += dlt * dlt;
      }
      if (ft <= f + lin + quad / (2.0 * step) + 1e-15) {
        lam = std::move(trial);
        f = ft;
        step *= 1.25;
        break;
      }
      step *= 0.5;
    }
  }
  return lam;
}

inline Distribution oracle_convex(const SolutionPool& pool, const PoolView& view, bool nash,
                                  double k) {
  const auto& M = view.varying;
  int S = pool.size();
  auto gains = [&](const std::vector<double>& lam, std::vector<double>& g) {
    g.assign(M.size(), 0.0);
    for (size_t mi = 0; mi < M.size(); ++mi) {
      int i = M[mi];
      for (int s = 0; s < S; ++s) g[mi] += lam[s] * pool[s].x[i];
      g[mi] -= view.lo[i];
    }
  };
  std::vector<double> buf;
  auto value = [&](const std::vector<double>& lam) {
    gains(lam, buf);
    double f = 0.0;
    for (size_t mi = 0; mi < M.size(); ++mi) {
      double gi = buf[mi];
      if (nash) {
        if (gi < 1e-12) return kInf;
        f -= std::log(gi);
      } else {
        double r = view.hi[M[mi]] - view.lo[M[mi]];
        f += std::pow(std::max(0.0, gi) / r, k);
      }
    }
    return f;
  };
  auto grad = [&](const std::vector<double>& lam, std::vector<double>& g) {
    gains(lam, buf);
    std::vector<double> gd(M.size());
    for (size_t mi = 0; mi < M.size(); ++mi) {
      if (nash)
        gd[mi] = -1.0 / std::max(buf[mi], 1e-12);
      else {
        double r = view.hi[M[mi]] - view.lo[M[mi]];
        gd[mi] = k * std::pow(std::max(0.0, buf[mi]) / r, k - 1.0) / r;
      }
    }
    for (int s = 0; s < S; ++s) {
      double acc = 0.0;
      for (size_t mi = 0; mi < M.size(); ++mi) acc += gd[mi] * pool[s].x[M[mi]];
      g[s] = acc;
    }
  };
  std::vector<double> lam = simplex_minimize(S, value, grad, 400000, 1e-12);
  return distribution_of(pool, lam);
}

inline Distribution oracle_rsd(const SolutionPool& pool, const PoolView& view) {
  std::vector<int> M = view.varying;
  if (M.size() > 9) throw TooLargeForExactError("brute_force_rule: |M|! too large for rsd_exact");
  std::sort(M.begin(), M.end());
  Distribution d;
  d.values.assign(view.n, 0.0);
  long count = 0;
  std::vector<int> sigma = M;
  do {
    std::vector<int> cand(pool.size());
    std::iota(cand.begin(), cand.end(), 0);
    for (int dict : sigma) {
      double best = -kInf;
      for (int s : cand) best = std::max(best, pool[s].x[dict]);
      std::vector<int> keep;
      for (int s : cand)
        if (pool[s].x[dict] >= best - 1e-9) keep.push_back(s);
      cand = std::move(keep);
    }
    for (int i = 0; i < view.n; ++i) d.values[i] += pool[cand.front()].x[i];
    ++count;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  for (double& v : d.values) v /= count;
  return d;
}

}  // namespace detail

inline Distribution brute_force_rule(const SolutionPool& pool, const BruteForceRule& rule,
                                     const std::optional<Bounds>& normalization = {}) {
  if (!pool.complete) throw PoolIncompleteError("brute_force_rule: pool must be complete");
  detail::PoolView view = detail::analyze_pool(pool, normalization);

  switch (rule.kind) {
    case BruteForceRule::Kind::leximin:
      return detail::oracle_leximin(pool, view);
    case BruteForceRule::Kind::maximin: {
      auto [gamma, lambda] = detail::pool_maximin_lp(pool, view, view.varying, {});
      (void)gamma;
      return detail::distribution_of(pool, lambda);
    }
    case BruteForceRule::Kind::nash:
      return detail::oracle_convex(pool, view, true, 0.0);
    case BruteForceRule::Kind::knorm:
      if (rule.k < 1.0) throw ConfigError("brute_force_rule: knorm needs k >= 1");
      return detail::oracle_convex(pool, view, false, rule.k);
    case BruteForceRule::Kind::rsd_exact:
      return detail::oracle_rsd(pool, view);
  }
  throw Error("brute_force_rule: unknown rule");
}

/// Maximin value over the convex hull of the pool (the leximin first stage).
inline double brute_force_maximin_value(const SolutionPool& pool,
                                        const std::optional<Bounds>& normalization = {}) {
  if (!pool.complete) throw PoolIncompleteError("brute_force_maximin_value: pool must be complete");
  detail::PoolView view = detail::analyze_pool(pool, normalization);
  auto [gamma, lambda] = detail::pool_maximin_lp(pool, view, view.varying, {});
  (void)lambda;
  return gamma;
}

}  // namespace fairlot
