// Command-line front end: solve, partition, enumerate, run distribution
// rules, sample a single solution, run benchmark experiments, audit axioms.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairlot/fairlot.hpp"

using namespace fairlot;

namespace {

struct CommonArgs {
  std::string instance_path;
  std::string format = "ilp-json";
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  int cap = 1000;
  long trials = 1000;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_instance = true) {
  auto* opt = cmd->add_option("--instance", args.instance_path, "instance file");
  if (needs_instance) opt->required();
  cmd->add_option("--format", args.format, "instance format: ke | tt | ilp-json")
      ->check(CLI::IsMember({"ke", "tt", "ilp-json"}));
  cmd->add_option("--epsilon", args.epsilon, "near-optimality fraction in [0,1)");
  cmd->add_option("--seed", args.seed, "random seed");
  cmd->add_option("--cap", args.cap, "enumeration cap");
  cmd->add_option("--trials", args.trials, "sampling trials");
  cmd->add_option("--out", args.out, "output path (default stdout)");
}

IlpInstance load_instance(const CommonArgs& args) {
  std::ifstream in(args.instance_path);
  if (!in) throw ConfigError("cannot open " + args.instance_path);
  if (args.format == "ke") return build_kidney_ilp(parse_kidney(in));
  if (args.format == "tt") return build_tardiness_ilp(parse_tardiness(in));
  return instance_from_json(json::parse(in));
}

void emit(const CommonArgs& args, const json& j) {
  if (args.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(args.out);
    out << j.dump(2) << "\n";
  }
}

RuleContext make_context(const IlpInstance& inst, double z_star, const CommonArgs& args,
                         double* t_partition = nullptr) {
  detail::Stopwatch clock;
  RuleContext ctx{inst, z_star};
  ctx.near = NearOptConfig{args.epsilon, 0.0};
  ctx.cap = args.cap;
  ctx.rsd_trials = args.trials;
  ctx.heuristic_trials = args.trials;
  ctx.seed = args.seed;
  if (inst.mode == Mode::dichotomous) {
    AgentPartition part = partition_agents(inst, z_star, ctx.solver, ctx.near);
    ctx.M = part.sometimes;
    ctx.cover = part.witness_pool;
  } else {
    SolutionPool witnesses;
    Bounds b = compute_bounds(inst, z_star, ctx.solver, &witnesses);
    ctx.M = b.varying;
    ctx.bounds = std::move(b);
    ctx.cover = std::move(witnesses);
  }
  if (t_partition) *t_partition = clock.seconds();
  return ctx;
}

json solution_report(const IlpInstance& inst, const Solution& s) {
  json j = solution_to_json(s);
  if (inst.mode == Mode::dichotomous) {
    json selected = json::array();
    for (int i = 0; i < inst.n_agents; ++i)
      if (s.x[i] > 0.5) selected.push_back(i);
    j["selected_agents"] = selected;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairness-controlled selection over ILP optima"};
  app.require_subcommand(1);

  CommonArgs solve_args, part_args, enum_args, rule_args, sample_args, audit_args;
  std::string rule_name = "leximin";
  std::string sample_rule = "rsd";

  CLI::App* cmd_solve = app.add_subcommand("solve", "find one optimal solution and z*");
  add_common(cmd_solve, solve_args);

  CLI::App* cmd_partition =
      app.add_subcommand("partition", "classify agents as always/never/sometimes selected");
  add_common(cmd_partition, part_args);

  CLI::App* cmd_enum = app.add_subcommand("enumerate", "enumerate optimal solutions (JSON lines)");
  add_common(cmd_enum, enum_args);

  CLI::App* cmd_rule = app.add_subcommand("rule", "compute a fair distribution over the optima");
  cmd_rule->add_option("name", rule_name,
                       "uniform | leximin | maximin | nash | knorm:<k> | rsd | rsd-exact | "
                       "rsd-sample | reindex | perturb | deterministic")
      ->required();
  add_common(cmd_rule, rule_args);

  CLI::App* cmd_sample =
      app.add_subcommand("sample", "randomly select a single solution under a rule's lottery");
  cmd_sample->add_option("--rule", sample_rule, "rule to sample from (default rsd)");
  add_common(cmd_sample, sample_args);

  CLI::App* cmd_audit = app.add_subcommand("audit", "audit fairness axioms on an enumerable instance");
  add_common(cmd_audit, audit_args);

  // bench flags
  ExperimentConfig bench_cfg;
  std::string bench_config_path, bench_rules = "uniform,leximin,nash,rsd", bench_gen;
  int bench_count = 10, bench_nmin = 20, bench_nmax = 40;
  double bench_beta = 0.25;
  std::uint64_t bench_gen_seed = 1;
  std::vector<std::string> bench_files;
  CLI::App* cmd_bench = app.add_subcommand("bench", "run the experiment harness");
  cmd_bench->add_option("--config", bench_config_path, "experiment config JSON file");
  cmd_bench->add_option("--gen", bench_gen, "generator kind: ke | tt");
  cmd_bench->add_option("--count", bench_count, "generated instance count");
  cmd_bench->add_option("--n-min", bench_nmin, "smallest instance size");
  cmd_bench->add_option("--n-max", bench_nmax, "largest instance size");
  cmd_bench->add_option("--beta", bench_beta, "tardiness due-date spread");
  cmd_bench->add_option("--gen-seed", bench_gen_seed, "generator seed");
  cmd_bench->add_option("--instance", bench_files, "instance files");
  cmd_bench->add_option("--format", bench_cfg.format, "file format: ke | tt | ilp-json");
  cmd_bench->add_option("--rules", bench_rules, "comma-separated rule list");
  cmd_bench->add_option("--epsilon", bench_cfg.epsilon, "near-optimality fraction");
  cmd_bench->add_option("--seed", bench_cfg.seed, "sampling seed");
  cmd_bench->add_option("--cap", bench_cfg.cap, "uniform enumeration cap");
  cmd_bench->add_option("--trials", bench_cfg.rsd_trials, "rsd sampling trials");
  cmd_bench->add_option("--heuristic-trials", bench_cfg.heuristic_trials, "heuristic trials");
  cmd_bench->add_option("--out", bench_cfg.out_prefix, "output prefix (.csv/.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_solve->parsed()) {
      IlpInstance inst = load_instance(solve_args);
      auto [sol, z] = solve_optimal(inst);
      json j = solution_report(inst, sol);
      j["z_star"] = z;
      emit(solve_args, j);
    } else if (cmd_partition->parsed()) {
      IlpInstance inst = load_instance(part_args);
      auto [sol, z] = solve_optimal(inst);
      AgentPartition p =
          partition_agents(inst, z, {}, NearOptConfig{part_args.epsilon, 0.0});
      json j{{"z_star", z},
             {"always", p.always},
             {"never", p.never},
             {"sometimes", p.sometimes},
             {"solver_calls", p.solver_calls},
             {"witnesses", p.witness_pool.size()}};
      emit(part_args, j);
    } else if (cmd_enum->parsed()) {
      IlpInstance inst = load_instance(enum_args);
      auto [sol, z] = solve_optimal(inst);
      SolutionPool pool =
          enumerate_optimal(inst, z, enum_args.cap, {}, NearOptConfig{enum_args.epsilon, 0.0});
      if (enum_args.out.empty()) {
        write_pool_jsonl(std::cout, pool);
      } else {
        std::ofstream out(enum_args.out);
        write_pool_jsonl(out, pool);
      }
    } else if (cmd_rule->parsed()) {
      IlpInstance inst = load_instance(rule_args);
      auto [sol, z] = solve_optimal(inst);
      double t_partition = 0.0;
      RuleContext ctx = make_context(inst, z, rule_args, &t_partition);
      RuleReport rep = run_rule(rule_name, ctx);
      json j = report_to_json(rep);
      j["z_star"] = z;
      j["M"] = ctx.M;
      j["t_partition_s"] = t_partition;
      emit(rule_args, j);
    } else if (cmd_sample->parsed()) {
      IlpInstance inst = load_instance(sample_args);
      auto [sol, z] = solve_optimal(inst);
      RuleContext ctx = make_context(inst, z, sample_args);
      Solution picked;
      if (sample_rule == "rsd") {
        picked = rsd_sample_one(inst, z, ctx.M, sample_args.seed, ctx.solver, ctx.near);
      } else {
        RuleReport rep = run_rule(sample_rule, ctx);
        CounterRng rng(sample_args.seed);
        double u = rng.next_double(), acc = 0.0;
        int chosen = rep.pool.size() - 1;
        for (int s = 0; s < rep.pool.size(); ++s) {
          acc += rep.lottery.weights[s];
          if (u < acc) {
            chosen = s;
            break;
          }
        }
        picked = rep.pool[chosen];
      }
      emit(sample_args, solution_report(inst, picked));
    } else if (cmd_audit->parsed()) {
      IlpInstance inst = load_instance(audit_args);
      auto [sol, z] = solve_optimal(inst);
      SolutionPool pool =
          enumerate_optimal(inst, z, audit_args.cap, {}, NearOptConfig{audit_args.epsilon, 0.0});
      if (!pool.complete) throw PoolIncompleteError("audit: enumeration hit the cap");
      RuleContext ctx = make_context(inst, z, audit_args);
      json out = json::array();
      for (const std::string& rn :
           {std::string("uniform"), std::string("leximin"), std::string("nash"),
            std::string("rsd-exact"), std::string("deterministic")}) {
        RuleReport rep = run_rule(rn, ctx);
        AuditReport audit = axiom_audit(pool, rep.distribution, ctx.M);
        json checks = json::array();
        for (const auto& c : audit.checks)
          checks.push_back({{"axiom", c.axiom},
                            {"audited", c.audited},
                            {"pass", c.pass},
                            {"witness", c.witness}});
        if (inst.n_agents <= 8) {
          AuditCheck anon = anonymity_audit(
              inst,
              [&](const IlpInstance& relabeled) {
                auto [s2, z2] = solve_optimal(relabeled);
                CommonArgs args2 = audit_args;
                RuleContext c2 = make_context(relabeled, z2, args2);
                return run_rule(rn, c2).distribution;
              },
              6, audit_args.seed);
          checks.push_back({{"axiom", anon.axiom},
                            {"audited", anon.audited},
                            {"pass", anon.pass},
                            {"witness", anon.witness}});
        }
        out.push_back({{"rule", rn}, {"checks", checks}});
      }
      emit(audit_args, out);
    } else if (cmd_bench->parsed()) {
      if (!bench_config_path.empty()) {
        std::ifstream in(bench_config_path);
        if (!in) throw ConfigError("cannot open " + bench_config_path);
        json j = json::parse(in);
        if (j.contains("generator")) {
          GeneratorSpec g;
          const json& gj = j.at("generator");
          g.kind = gj.value("kind", std::string("ke"));
          g.count = gj.value("count", 10);
          g.n_min = gj.value("n_min", 20);
          g.n_max = gj.value("n_max", 40);
          g.beta = gj.value("beta", 0.25);
          g.seed = gj.value("seed", std::uint64_t{1});
          bench_cfg.generator = g;
        }
        if (j.contains("files")) bench_cfg.files = j.at("files").get<std::vector<std::string>>();
        if (j.contains("format")) bench_cfg.format = j.at("format").get<std::string>();
        if (j.contains("rules")) bench_cfg.rules = j.at("rules").get<std::vector<std::string>>();
        bench_cfg.epsilon = j.value("epsilon", bench_cfg.epsilon);
        bench_cfg.seed = j.value("seed", bench_cfg.seed);
        bench_cfg.cap = j.value("cap", bench_cfg.cap);
        bench_cfg.rsd_trials = j.value("rsd_trials", bench_cfg.rsd_trials);
        bench_cfg.heuristic_trials = j.value("heuristic_trials", bench_cfg.heuristic_trials);
        if (j.contains("out")) bench_cfg.out_prefix = j.at("out").get<std::string>();
      } else {
        if (!bench_gen.empty()) {
          GeneratorSpec g;
          g.kind = bench_gen;
          g.count = bench_count;
          g.n_min = bench_nmin;
          g.n_max = bench_nmax;
          g.beta = bench_beta;
          g.seed = bench_gen_seed;
          bench_cfg.generator = g;
        }
        bench_cfg.files = bench_files;
        bench_cfg.rules.clear();
        std::stringstream ss(bench_rules);
        std::string item;
        while (std::getline(ss, item, ','))
          if (!item.empty()) bench_cfg.rules.push_back(item);
      }
      ExperimentResult result = run_experiment(bench_cfg);
      if (bench_cfg.out_prefix.empty()) std::cout << result.csv();
      for (const auto& e : result.errors) std::cerr << "error: " << e << "\n";
      return result.errors.empty() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "fairlot: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
