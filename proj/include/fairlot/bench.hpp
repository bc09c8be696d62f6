#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fairlot/colgen.hpp"
#include "fairlot/enumeration.hpp"
#include "fairlot/instances.hpp"
#include "fairlot/json_io.hpp"
#include "fairlot/oracle.hpp"
#include "fairlot/rsd.hpp"

namespace fairlot {

// ---------------------------------------------------------------------------
// Axiom audit

struct AuditCheck {
  std::string axiom;
  bool audited = true;
  bool pass = false;
  std::string witness;
};

struct AuditReport {
  std::vector<AuditCheck> checks;

  const AuditCheck* find(const std::string& axiom) const {
    for (const auto& c : checks)
      if (c.axiom == axiom) return &c;
    return nullptr;
  }
  bool passed(const std::string& axiom) const {
    const AuditCheck* c = find(axiom);
    return c && c->audited && c->pass;
  }
};

/// Empirical audit of proportionality and efficiency axioms for a
/// distribution over a complete pool. Average and core fair share are
/// reported but not audited.
inline AuditReport axiom_audit(const SolutionPool& pool, const Distribution& d,
                               const std::vector<int>& M, double tol = 1e-6) {
  if (!pool.complete) throw PoolIncompleteError("axiom_audit: pool must be complete");
  AuditReport rep;
  if (M.empty()) return rep;
  double share = 1.0 / static_cast<double>(M.size());

  {
    AuditCheck c{"individual_fair_share"};
    c.pass = true;
    for (int i : M)
      if (d[i] < share - tol) {
        c.pass = false;
        char buf[128];
        std::snprintf(buf, sizeof buf, "agent %d has probability %.6g < 1/|M| = %.6g", i, d[i],
                      share);
        c.witness = buf;
        break;
      }
    rep.checks.push_back(c);
  }

  {
    // Groups of like-minded agents: identical columns across the pool.
    AuditCheck c{"unanimous_fair_share"};
    c.pass = true;
    std::map<std::vector<long long>, std::vector<int>> groups;
    for (int i : M) {
      std::vector<long long> column;
      for (const auto& s : pool.solutions()) column.push_back(std::llround(s.x[i] * 1e9));
      groups[column].push_back(i);
    }
    for (const auto& [col, members] : groups) {
      double entitlement = share * static_cast<double>(members.size());
      for (int i : members)
        if (d[i] < entitlement - tol) {
          c.pass = false;
          char buf[160];
          std::snprintf(buf, sizeof buf,
                        "agent %d in a group of %zu has probability %.6g < |K|/|M| = %.6g", i,
                        members.size(), d[i], entitlement);
          c.witness = buf;
        }
    }
    rep.checks.push_back(c);
  }

  {
    // Pareto efficiency: can any realizable d' dominate d?
    AuditCheck c{"pareto_efficiency"};
    LinearProgram lp;
    for (int s = 0; s < pool.size(); ++s) lp.add_var(0.0, 0.0, kInf);
    std::vector<int> surplus(M.size());
    for (size_t mi = 0; mi < M.size(); ++mi) surplus[mi] = lp.add_var(1.0, 0.0, kInf);
    for (size_t mi = 0; mi < M.size(); ++mi) {
      int i = M[mi];
      LinearRow row;
      for (int s = 0; s < pool.size(); ++s)
        if (pool[s].x[i] != 0.0) row.coeffs.push_back({s, pool[s].x[i]});
      row.coeffs.push_back({surplus[mi], -1.0});
      row.rel = Rel::eq;
      row.rhs = d[i];
      lp.rows.push_back(std::move(row));
    }
    LinearRow conv;
    for (int s = 0; s < pool.size(); ++s) conv.coeffs.push_back({s, 1.0});
    conv.rel = Rel::eq;
    conv.rhs = 1.0;
    lp.rows.push_back(std::move(conv));
    LpSolution res = solve_lp(lp);
    if (res.status == LpStatus::infeasible) {
      // d is not realizable over this pool at equality; treat as not audited.
      c.audited = false;
      c.witness = "distribution not realizable over the pool";
    } else {
      c.pass = res.objective <= 1e-7;
      if (!c.pass) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "dominating distribution gains %.6g total probability",
                      res.objective);
        c.witness = buf;
      }
    }
    rep.checks.push_back(c);
  }

  rep.checks.push_back({"average_fair_share", false, false, "not audited"});
  rep.checks.push_back({"core_fair_share", false, false, "not audited"});
  return rep;
}

/// Anonymity audit by label permutation: rerun the rule on relabeled copies
/// and require the distribution to follow the relabeling.
inline AuditCheck anonymity_audit(
    const IlpInstance& inst, const std::function<Distribution(const IlpInstance&)>& rule,
    int permutations, std::uint64_t seed, double tol = 1e-6) {
  AuditCheck c{"anonymity"};
  c.pass = true;
  if (inst.n_agents > 8) {
    c.audited = false;
    c.witness = "instance too large for permutation audit";
    return c;
  }
  Distribution base = rule(inst);
  int n = inst.n_agents;
  for (int p = 0; p < permutations; ++p) {
    CounterRng rng(seed, static_cast<std::uint64_t>(p));
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    IlpInstance relabeled = inst;
    std::vector<int> pos(n);
    for (int k = 0; k < n; ++k) {
      relabeled.agent_objective[k] = inst.agent_objective[order[k]];
      relabeled.agent_domain[k] = inst.agent_domain[order[k]];
      pos[order[k]] = k;
    }
    for (auto& row : relabeled.rows)
      for (auto& [j, a] : row.coeffs)
        if (j < n) j = pos[j];
    Distribution got = rule(relabeled);
    for (int i = 0; i < n; ++i)
      if (std::abs(got[pos[i]] - base[i]) > tol) {
        c.pass = false;
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "relabeling %d moves agent %d from %.6g to %.6g", p, i, base[i],
                      got[pos[i]]);
        c.witness = buf;
        return c;
      }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Experiment harness

struct GeneratorSpec {
  std::string kind;  // "ke" or "tt"
  int count = 1;
  int n_min = 10, n_max = 10;  // pairs (ke) or jobs (tt)
  double beta = 0.25;          // tt due-date spread
  std::uint64_t seed = 1;
  KidneyParams ke_params;
};

struct ExperimentConfig {
  std::optional<GeneratorSpec> generator;
  std::vector<std::string> files;
  std::string format = "ilp-json";  // ke | tt | ilp-json
  std::vector<std::string> rules;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  int cap = 1000;
  long rsd_trials = 1000;
  long heuristic_trials = 1000;
  int rsd_exact_limit = 7;
  std::string out_prefix;
  SolverConfig solver;

  void validate() const {
    if (rules.empty()) throw ConfigError("experiment: at least one rule required");
    if (!generator && files.empty())
      throw ConfigError("experiment: no instance source configured");
    for (const auto& f : files)
      if (!std::ifstream(f).good()) throw ConfigError("experiment: cannot read file " + f);
  }
};

struct MetricsRow {
  std::string instance;
  int id = 0;
  int m_size = 0;
  std::string rule;
  double min_prob = 0.0;
  double min_prob_ratio = 0.0;
  double log_nash = -kInf;
  double nash_ratio = 0.0;
  bool nash_defined = true;
  double t_opt_s = 0.0, t_partition_s = 0.0, t_rule_s = 0.0;
  long iterations = 0;
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::vector<std::string> errors;
  json reports = json::array();

  // Timing table grouped by instance family: mean and standard deviation of
  // the per-rule times. Rule columns carry a * when the rule additionally
  // needs the partition, whose time is reported separately.
  std::string timing_csv() const {
    struct Acc {
      int n = 0;
      double m_sum = 0;
      std::map<std::string, std::pair<double, double>> sums;  // rule -> (sum, sumsq)
      std::map<std::string, int> counts;
    };
    auto family = [](const std::string& name) {
      auto p = name.find("-s");
      return p == std::string::npos ? name : name.substr(0, p);
    };
    std::map<std::string, Acc> groups;
    std::map<int, bool> seen_instance;
    for (const auto& r : rows) {
      Acc& g = groups[family(r.instance)];
      if (!seen_instance[r.id]) {
        seen_instance[r.id] = true;
        ++g.n;
        g.m_sum += r.m_size;
        g.sums["t_opt"].first += r.t_opt_s;
        g.sums["t_opt"].second += r.t_opt_s * r.t_opt_s;
        g.counts["t_opt"]++;
        g.sums["partition"].first += r.t_partition_s;
        g.sums["partition"].second += r.t_partition_s * r.t_partition_s;
        g.counts["partition"]++;
      }
      if (r.rule == "ref-1-over-M") continue;
      g.sums[r.rule].first += r.t_rule_s;
      g.sums[r.rule].second += r.t_rule_s * r.t_rule_s;
      g.counts[r.rule]++;
    }
    std::vector<std::string> rule_cols;
    for (const auto& r : rows)
      if (r.rule != "ref-1-over-M" &&
          std::find(rule_cols.begin(), rule_cols.end(), r.rule) == rule_cols.end())
        rule_cols.push_back(r.rule);

    std::ostringstream out;
    out << "inst,|M|,t_opt,partition";
    for (const auto& rc : rule_cols) out << "," << rc << "*_mean," << rc << "*_std";
    out << "\n";
    char buf[64];
    auto num = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.6g", v);
      return std::string(buf);
    };
    for (const auto& [name, g] : groups) {
      auto mean = [&](const std::string& k) {
        int c = g.counts.count(k) ? g.counts.at(k) : 0;
        return c ? g.sums.at(k).first / c : 0.0;
      };
      auto stdev = [&](const std::string& k) {
        int c = g.counts.count(k) ? g.counts.at(k) : 0;
        if (c < 1) return 0.0;
        double m = g.sums.at(k).first / c;
        return std::sqrt(std::max(0.0, g.sums.at(k).second / c - m * m));
      };
      out << name << "," << num(g.m_sum / std::max(1, g.n)) << "," << num(mean("t_opt")) << ","
          << num(mean("partition"));
      for (const auto& rc : rule_cols) out << "," << num(mean(rc)) << "," << num(stdev(rc));
      out << "\n";
    }
    return out.str();
  }

  std::string csv() const {
    std::ostringstream out;
    out << "instance,id,|M|,rule,min_prob,min_prob_ratio,log_nash,nash_ratio,"
           "t_opt_s,t_partition_s,t_rule_s,iterations\n";
    char buf[64];
    auto num = [&](double v) {
      if (v == -kInf) return std::string("-inf");
      std::snprintf(buf, sizeof buf, "%.12g", v);
      return std::string(buf);
    };
    for (const auto& r : rows) {
      out << r.instance << "," << r.id << "," << r.m_size << "," << r.rule << ","
          << num(r.min_prob) << "," << num(r.min_prob_ratio) << ","
          << (r.nash_defined ? num(r.log_nash) : std::string()) << ","
          << (r.nash_defined ? num(r.nash_ratio) : std::string()) << "," << num(r.t_opt_s) << ","
          << num(r.t_partition_s) << "," << num(r.t_rule_s) << "," << r.iterations << "\n";
    }
    return out.str();
  }
};

namespace detail {

struct BenchInstance {
  std::string name;
  IlpInstance inst;
};

inline std::vector<BenchInstance> materialize_instances(const ExperimentConfig& cfg) {
  std::vector<BenchInstance> out;
  if (cfg.generator) {
    const GeneratorSpec& g = *cfg.generator;
    for (int k = 0; k < g.count; ++k) {
      std::uint64_t seed = g.seed + static_cast<std::uint64_t>(k);
      int span = std::max(0, g.n_max - g.n_min);
      int n = g.n_min + (span == 0 ? 0 : static_cast<int>(seed % static_cast<std::uint64_t>(span + 1)));
      if (g.kind == "ke") {
        KidneyInstance ke = gen_kidney(n, seed, g.ke_params);
        out.push_back({"ke" + std::to_string(n) + "-s" + std::to_string(seed),
                       build_kidney_ilp(ke)});
      } else if (g.kind == "tt") {
        TardinessInstance tt = gen_tardiness(n, g.beta, seed);
        out.push_back({"tt" + std::to_string(n) + "-s" + std::to_string(seed),
                       build_tardiness_ilp(tt)});
      } else {
        throw ConfigError("experiment: unknown generator kind " + g.kind);
      }
    }
  }
  for (const auto& f : cfg.files) {
    std::ifstream in(f);
    if (cfg.format == "ke") {
      out.push_back({f, build_kidney_ilp(parse_kidney(in))});
    } else if (cfg.format == "tt") {
      out.push_back({f, build_tardiness_ilp(parse_tardiness(in))});
    } else {
      json j = json::parse(in);
      out.push_back({f, instance_from_json(j)});
    }
  }
  return out;
}

}  // namespace detail

/// Everything a rule needs to run on one instance: the verified optimum, the
/// varying agents, cardinal bounds when applicable, and a covering pool.
struct RuleContext {
  const IlpInstance& inst;
  double z_star;
  std::vector<int> M;
  std::optional<Bounds> bounds;   // set in cardinal mode
  SolutionPool cover;             // covers every agent of M
  NearOptConfig near;
  SolverConfig solver;
  int cap = 1000;
  long rsd_trials = 1000;
  long heuristic_trials = 1000;
  int rsd_exact_limit = 7;
  std::uint64_t seed = 0;
};

inline RuleReport run_rule(const std::string& name, const RuleContext& ctx,
                           SolverBackend& backend = builtin_backend()) {
  const IlpInstance& inst = ctx.inst;
  if (name == "uniform") {
    detail::Stopwatch clock;
    SolutionPool pool = enumerate_optimal(inst, ctx.z_star, ctx.cap, ctx.solver, ctx.near, backend);
    auto [d, lot] = uniform_rule(pool);
    RuleReport rep;
    rep.rule = "uniform";
    rep.distribution = std::move(d);
    rep.lottery = std::move(lot);
    rep.pool = std::move(pool);
    rep.approximate = !rep.pool.complete;
    rep.iterations = rep.pool.size();
    rep.wall_time_s = clock.seconds();
    return rep;
  }
  if (name == "leximin")
    return leximin(inst, ctx.z_star, ctx.M, ctx.cover, ctx.bounds, ctx.solver, ctx.near, backend);
  if (name == "maximin")
    return maximin(inst, ctx.z_star, ctx.M, ctx.cover, ctx.bounds, ctx.solver, ctx.near, backend);
  if (name == "nash")
    return minimize_convex(inst, ctx.z_star, ctx.M, ConvexObjective::nash(ctx.bounds), ctx.cover,
                           ctx.solver, ctx.near, backend);
  if (name.rfind("knorm", 0) == 0) {
    double k = 2.0;
    if (auto p = name.find(':'); p != std::string::npos) k = std::stod(name.substr(p + 1));
    return minimize_convex(inst, ctx.z_star, ctx.M, ConvexObjective::knorm(k, ctx.bounds),
                           ctx.cover, ctx.solver, ctx.near, backend);
  }
  if (name == "rsd" || name == "rsd-exact" || name == "rsd-sample") {
    RsdMode mode;
    if (name == "rsd-exact" ||
        (name == "rsd" && static_cast<int>(ctx.M.size()) <= ctx.rsd_exact_limit)) {
      mode = RsdMode::exact_mode();
      mode.exact_limit = std::max(ctx.rsd_exact_limit, static_cast<int>(ctx.M.size()));
      if (name == "rsd-exact") mode.exact_limit = ctx.rsd_exact_limit;
    } else {
      mode = RsdMode::sample(ctx.rsd_trials);
    }
    SolverConfig cfg = ctx.solver;
    cfg.seed = ctx.seed;
    return rsd_distribution(inst, ctx.z_star, ctx.M, mode, cfg, ctx.near, backend);
  }
  if (name == "reindex")
    return heuristic(inst, HeuristicKind::reindex, ctx.heuristic_trials, ctx.seed, ctx.solver,
                     ctx.z_star, false, backend);
  if (name == "perturb")
    return heuristic(inst, HeuristicKind::perturb, ctx.heuristic_trials, ctx.seed, ctx.solver,
                     ctx.z_star, false, backend);
  if (name == "perturb-raw")
    return heuristic(inst, HeuristicKind::perturb, ctx.heuristic_trials, ctx.seed, ctx.solver,
                     ctx.z_star, true, backend);
  if (name == "deterministic") {
    detail::Stopwatch clock;
    OptimalResult base = solve_optimal(inst, ctx.solver, backend);
    RuleReport rep;
    rep.rule = "deterministic";
    rep.pool.z_star = ctx.z_star;
    rep.pool.add(base.solution);
    rep.lottery.weights = {1.0};
    rep.distribution.values = base.solution.x;
    if (inst.mode == Mode::dichotomous)
      for (double& v : rep.distribution.values) v = std::round(v);
    rep.wall_time_s = clock.seconds();
    return rep;
  }
  throw ConfigError("unknown rule: " + name);
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       SolverBackend& backend = builtin_backend()) {
  cfg.validate();
  ExperimentResult result;
  std::vector<detail::BenchInstance> instances = detail::materialize_instances(cfg);
  NearOptConfig near{cfg.epsilon, 0.0};

  int id = 0;
  for (const auto& bi : instances) {
    ++id;
    try {
      detail::Stopwatch t_opt_clock;
      OptimalResult opt = solve_optimal(bi.inst, cfg.solver, backend);
      double t_opt = t_opt_clock.seconds();

      detail::Stopwatch t_part_clock;
      RuleContext ctx{bi.inst, opt.z_star};
      ctx.near = near;
      ctx.solver = cfg.solver;
      ctx.cap = cfg.cap;
      ctx.rsd_trials = cfg.rsd_trials;
      ctx.heuristic_trials = cfg.heuristic_trials;
      ctx.rsd_exact_limit = cfg.rsd_exact_limit;
      ctx.seed = cfg.seed;
      std::vector<double> lo(bi.inst.n_agents, 0.0), range(bi.inst.n_agents, 1.0);
      if (bi.inst.mode == Mode::dichotomous) {
        AgentPartition part = partition_agents(bi.inst, opt.z_star, cfg.solver, near, backend);
        ctx.M = part.sometimes;
        ctx.cover = part.witness_pool;
      } else {
        SolutionPool witnesses;
        Bounds b = compute_bounds(bi.inst, opt.z_star, cfg.solver, &witnesses, backend);
        ctx.M = b.varying;
        for (int i = 0; i < bi.inst.n_agents; ++i) {
          lo[i] = b.dystopia[i];
          range[i] = std::max(b.range(i), 1e-12);
        }
        ctx.bounds = std::move(b);
        ctx.cover = std::move(witnesses);
      }
      double t_partition = t_part_clock.seconds();

      auto ratio_metrics = [&](const Distribution& d, MetricsRow& row) {
        row.min_prob = kInf;
        row.log_nash = 0.0;
        row.nash_defined = true;
        for (int i : ctx.M) {
          double gain = d[i] - lo[i];
          row.min_prob = std::min(row.min_prob, gain / range[i]);
          if (gain <= 1e-12) {
            row.log_nash = -kInf;
          } else if (row.log_nash != -kInf) {
            row.log_nash += std::log(gain);
          }
        }
        if (ctx.M.empty()) row.min_prob = 0.0;
      };

      // Reference optima for the ratio columns.
      RuleReport maximin_ref = run_rule("maximin", ctx, backend);
      double gamma_opt = maximin_ref.first_stage_value;
      RuleReport nash_ref = run_rule("nash", ctx, backend);
      MetricsRow nash_row_ref;
      ratio_metrics(nash_ref.distribution, nash_row_ref);
      double log_nash_opt = nash_row_ref.log_nash;

      for (const auto& rule : cfg.rules) {
        MetricsRow row;
        row.instance = bi.name;
        row.id = id;
        row.m_size = static_cast<int>(ctx.M.size());
        row.rule = rule;
        try {
          detail::Stopwatch t_rule_clock;
          RuleReport rep = rule == "nash"      ? nash_ref
                           : rule == "maximin" ? maximin_ref
                                               : run_rule(rule, ctx, backend);
          row.t_rule_s = rule == "nash"      ? nash_ref.wall_time_s
                         : rule == "maximin" ? maximin_ref.wall_time_s
                                             : t_rule_clock.seconds();
          if (!rep.approximate && !rep.pool.empty() &&
              !realizes(rep.pool, rep.lottery, rep.distribution, 1e-5))
            throw Error("reported lottery does not realize the distribution");
          ratio_metrics(rep.distribution, row);
          row.min_prob_ratio = gamma_opt > 1e-12 ? row.min_prob / gamma_opt : 0.0;
          if (row.log_nash == -kInf || log_nash_opt == -kInf)
            row.nash_ratio = 0.0;
          else
            row.nash_ratio =
                std::exp((row.log_nash - log_nash_opt) / std::max<size_t>(1, ctx.M.size()));
          row.t_opt_s = t_opt;
          row.t_partition_s = t_partition;
          row.iterations = rep.iterations;
          result.rows.push_back(row);

          json jr = report_to_json(rep);
          jr["instance"] = bi.name;
          jr["id"] = id;
          result.reports.push_back(jr);
        } catch (const std::exception& e) {
          result.errors.push_back(bi.name + " / " + rule + ": " + e.what());
        }
      }

      // Equal-decision-power reference line.
      if (!ctx.M.empty()) {
        MetricsRow ref;
        ref.instance = bi.name;
        ref.id = id;
        ref.m_size = static_cast<int>(ctx.M.size());
        ref.rule = "ref-1-over-M";
        ref.min_prob = 1.0 / static_cast<double>(ctx.M.size());
        ref.min_prob_ratio = gamma_opt > 1e-12 ? ref.min_prob / gamma_opt : 0.0;
        ref.nash_defined = false;
        ref.t_opt_s = t_opt;
        ref.t_partition_s = t_partition;
        result.rows.push_back(ref);
      }
    } catch (const std::exception& e) {
      result.errors.push_back(bi.name + ": " + e.what());
    }
  }

  if (!cfg.out_prefix.empty()) {
    std::ofstream csv(cfg.out_prefix + ".csv");
    csv << result.csv();
    std::ofstream tcsv(cfg.out_prefix + "_timings.csv");
    tcsv << result.timing_csv();
    std::ofstream js(cfg.out_prefix + ".json");
    json j;
    j["rows"] = json::array();
    for (const auto& r : result.rows) {
      j["rows"].push_back({{"instance", r.instance},
                           {"id", r.id},
                           {"M", r.m_size},
                           {"rule", r.rule},
                           {"min_prob", sig12(r.min_prob)},
                           {"min_prob_ratio", sig12(r.min_prob_ratio)},
                           {"log_nash", r.nash_defined && r.log_nash != -kInf
                                            ? json(sig12(r.log_nash))
                                            : json()},
                           {"nash_ratio", r.nash_defined ? json(sig12(r.nash_ratio)) : json()},
                           {"t_opt_s", r.t_opt_s},
                           {"t_partition_s", r.t_partition_s},
                           {"t_rule_s", r.t_rule_s},
                           {"iterations", r.iterations}});
    }
    j["reports"] = result.reports;
    j["errors"] = result.errors;
    js << j.dump(2) << "\n";
  }
  return result;
}

}  // namespace fairlot
