#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairlot/simplex.hpp"

namespace fairlot {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleError : Error { using Error::Error; };
struct UnboundedError : Error { using Error::Error; };
struct TimeLimitError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct InvalidEpsilonError : Error { using Error::Error; };
struct NotRealizableError : Error { using Error::Error; };
struct EmptyPoolError : Error { using Error::Error; };
struct CoverageError : Error { using Error::Error; };
struct GradientUndefinedError : Error { using Error::Error; };
struct NonConvergenceError : Error { using Error::Error; };
struct PoolIncompleteError : Error { using Error::Error; };
struct TooLargeForExactError : Error { using Error::Error; };
struct NonIntegerObjectiveError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

enum class Mode { dichotomous, cardinal };

struct VarDomain {
  double lo = 0.0;
  double hi = 1.0;
  bool integral = true;

  static VarDomain binary() { return {0.0, 1.0, true}; }
  static VarDomain continuous(double lo, double hi) { return {lo, hi, false}; }
  static VarDomain integer(double lo, double hi) { return {lo, hi, true}; }
};

/// Agent-indexed integer linear program, always a maximization. Variables are
/// indexed with the n agent variables first, then the k auxiliary variables.
struct IlpInstance {
  int n_agents = 0;
  std::vector<double> agent_objective;  // length n
  std::vector<double> aux_objective;    // length k
  std::vector<VarDomain> agent_domain;
  std::vector<VarDomain> aux_domain;
  std::vector<LinearRow> rows;
  Mode mode = Mode::dichotomous;
  std::string name;

  int aux_count() const { return static_cast<int>(aux_objective.size()); }
  int num_vars() const { return n_agents + aux_count(); }

  void validate() const {
    if (n_agents < 0) throw Error("instance: negative agent count");
    if (static_cast<int>(agent_objective.size()) != n_agents ||
        static_cast<int>(agent_domain.size()) != n_agents)
      throw Error("instance: agent vectors disagree with n_agents");
    if (aux_domain.size() != aux_objective.size())
      throw Error("instance: aux vectors disagree");
    for (const auto& row : rows)
      for (auto [j, a] : row.coeffs) {
        (void)a;
        if (j < 0 || j >= num_vars()) throw Error("instance: coefficient index out of range");
      }
    for (const auto& d : agent_domain) {
      if (!(d.lo > -kInf)) throw Error("instance: agent variable lacks a finite lower bound");
      if (mode == Mode::dichotomous && !(d.lo == 0.0 && d.hi == 1.0 && d.integral))
        throw Error("instance: dichotomous mode requires binary agent domains");
    }
    for (const auto& d : aux_domain)
      if (!(d.lo > -kInf)) throw Error("instance: aux variable lacks a finite lower bound");
  }

  double objective_value(const std::vector<double>& x, const std::vector<double>& y) const {
    double z = 0.0;
    for (int i = 0; i < n_agents; ++i) z += agent_objective[i] * x[i];
    for (int j = 0; j < aux_count(); ++j) z += aux_objective[j] * y[j];
    return z;
  }
};

/// One feasible point of an instance, split into agent and aux parts.
struct Solution {
  std::vector<double> x;
  std::vector<double> y;
  double objective = 0.0;
};

/// Deduplicated set of solutions. Two solutions with the same x-projection
/// count as one; the y-part of the first witness is kept.
class SolutionPool {
 public:
  double z_star = 0.0;
  bool complete = false;

  const std::vector<Solution>& solutions() const { return solutions_; }
  const Solution& operator[](int s) const { return solutions_[s]; }
  int size() const { return static_cast<int>(solutions_.size()); }
  bool empty() const { return solutions_.empty(); }

  static std::vector<long long> x_key(const std::vector<double>& x) {
    std::vector<long long> k(x.size());
    for (size_t i = 0; i < x.size(); ++i) k[i] = std::llround(x[i] * 1e9);
    return k;
  }

  bool contains_x(const std::vector<double>& x) const { return index_.count(x_key(x)) > 0; }

  int find(const std::vector<double>& x) const {
    auto it = index_.find(x_key(x));
    return it == index_.end() ? -1 : it->second;
  }

  // Returns the index of the solution; duplicates are not re-added.
  int add(Solution s) {
    auto key = x_key(s.x);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    int id = size();
    index_.emplace(std::move(key), id);
    solutions_.push_back(std::move(s));
    return id;
  }

  void merge(const SolutionPool& other) {
    for (const auto& s : other.solutions_) add(s);
  }

 private:
  std::vector<Solution> solutions_;
  std::map<std::vector<long long>, int> index_;
};

/// Per-agent selection probabilities (dichotomous) or expected utilities
/// (cardinal), always of length n_agents.
struct Distribution {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values[i]; }
};

/// Probability weights over the solutions of a pool, aligned by index.
struct Lottery {
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
  int support_size(double tol = 1e-9) const {
    int c = 0;
    for (double w : weights)
      if (w > tol) ++c;
    return c;
  }
};

/// Outcome of running a distribution rule: the distribution, a realizing
/// lottery over the attached pool, and run diagnostics.
struct RuleReport {
  std::string rule;
  Distribution distribution;
  SolutionPool pool;
  Lottery lottery;
  int iterations = 0;
  long pricing_calls = 0;
  long master_solves = 0;
  double wall_time_s = 0.0;
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
  double condition_slack = std::numeric_limits<double>::quiet_NaN();
  double first_stage_value = std::numeric_limits<double>::quiet_NaN();
  bool approximate = false;           // sampled or capped result
  std::vector<double> std_error;      // per-agent standard error when sampled
  long rejected = 0;                  // perturb heuristic redraws
};

struct SolverConfig {
  double omega = 1e-5;  // feasibility/optimality tolerance
  double time_limit_s = kInf;
  std::uint64_t seed = 0;
  std::optional<double> objective_abort_threshold;

  // engine knobs
  double master_band = 1e-9;     // half-width of fixed-value bands in master LPs
  double reduced_cost_tol = 1e-7;
  long max_nodes = 5000000;

  void validate() const {
    if (!(omega > 0.0)) throw ConfigError("config: omega must be positive");
  }
};

struct NearOptConfig {
  double epsilon = 0.0;        // in [0, 1)
  double absolute_slack = 0.0; // extra slack, used when z* <= 0

  bool exact() const { return epsilon == 0.0 && absolute_slack == 0.0; }
};

inline std::vector<bool> integer_mask(const IlpInstance& inst) {
  std::vector<bool> mask(inst.num_vars());
  for (int i = 0; i < inst.n_agents; ++i) mask[i] = inst.agent_domain[i].integral;
  for (int j = 0; j < inst.aux_count(); ++j) mask[inst.n_agents + j] = inst.aux_domain[j].integral;
  return mask;
}

inline LinearProgram build_lp(const IlpInstance& inst) {
  LinearProgram lp;
  lp.maximize = true;
  for (int i = 0; i < inst.n_agents; ++i)
    lp.add_var(inst.agent_objective[i], inst.agent_domain[i].lo, inst.agent_domain[i].hi);
  for (int j = 0; j < inst.aux_count(); ++j)
    lp.add_var(inst.aux_objective[j], inst.aux_domain[j].lo, inst.aux_domain[j].hi);
  lp.rows = inst.rows;
  return lp;
}

inline Solution split_solution(const IlpInstance& inst, const std::vector<double>& full) {
  Solution s;
  s.x.assign(full.begin(), full.begin() + inst.n_agents);
  s.y.assign(full.begin() + inst.n_agents, full.begin() + inst.num_vars());
  s.objective = inst.objective_value(s.x, s.y);
  return s;
}

}  // namespace fairlot
