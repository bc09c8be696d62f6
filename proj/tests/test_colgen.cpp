#include <doctest.h>

#include "fairlot/colgen.hpp"
#include "fairlot/enumeration.hpp"
#include "fairlot/oracle.hpp"
#include "test_helpers.hpp"

using namespace fairlot;
using namespace testutil;

namespace {

struct Prepared {
  IlpInstance inst;
  double z = 0;
  AgentPartition part;
  SolutionPool cover;
};

Prepared prepare(IlpInstance inst) {
  Prepared p{std::move(inst)};
  auto [sol, z] = solve_optimal(p.inst);
  p.z = z;
  p.part = partition_agents(p.inst, z);
  p.cover = greedy_cover(p.inst, z, p.part.sometimes);
  return p;
}

}  // namespace

TEST_CASE("leximin: golden distributions") {
  Prepared ex = prepare(example_knapsack());
  RuleReport rep = leximin(ex.inst, ex.z, ex.part.sometimes, ex.cover);
  CHECK(rep.distribution[0] == doctest::Approx(1.0 / 3).epsilon(1e-5));
  CHECK(rep.distribution[1] == doctest::Approx(2.0 / 3).epsilon(1e-5));
  CHECK(rep.distribution[2] == doctest::Approx(1.0 / 3).epsilon(1e-5));
  CHECK(rep.distribution[3] == doctest::Approx(1.0 / 3).epsilon(1e-5));
  CHECK(rep.first_stage_value == doctest::Approx(1.0 / 3).epsilon(1e-6));
  CHECK(rep.iterations == 2);  // the first stage fixes agents 1,3,4; then agent 2
  CHECK(realizes(rep.pool, rep.lottery, rep.distribution, 1e-5));

  Prepared in = prepare(intro_knapsack());
  RuleReport repi = leximin(in.inst, in.z, in.part.sometimes, in.cover);
  for (int i = 0; i < 4; ++i) CHECK(repi.distribution[i] == doctest::Approx(0.6).epsilon(1e-5));

  SUBCASE("singleton optimal set resolves in one iteration") {
    IlpInstance forced;
    forced.n_agents = 2;
    forced.agent_objective = {2, 1};
    forced.agent_domain.assign(2, VarDomain::binary());
    forced.rows.push_back({{{0, 1.0}, {1, 1.0}}, Rel::le, 1.0});
    Prepared f = prepare(std::move(forced));
    CHECK(f.part.sometimes.empty());
    RuleReport repf = leximin(f.inst, f.z, f.part.sometimes, f.cover);
    CHECK(repf.distribution[0] == doctest::Approx(1.0));
    CHECK(repf.distribution[1] == doctest::Approx(0.0));
  }
}

TEST_CASE("leximin: output is unique across column orders") {
  Prepared ex = prepare(example_knapsack());
  RuleReport base = leximin(ex.inst, ex.z, ex.part.sometimes, ex.cover);

  // same columns, reversed insertion order
  SolutionPool reversed;
  reversed.z_star = ex.cover.z_star;
  for (int s = ex.cover.size() - 1; s >= 0; --s) reversed.add(ex.cover[s]);
  RuleReport alt = leximin(ex.inst, ex.z, ex.part.sometimes, reversed);
  for (int i = 0; i < ex.inst.n_agents; ++i)
    CHECK(base.distribution[i] == doctest::Approx(alt.distribution[i]).epsilon(1e-5));

  // starting from a single arbitrary column also converges to the same point
  SolutionPool tiny;
  tiny.z_star = ex.z;
  tiny.add(ex.cover[0]);
  bool covered = true;
  for (int i : ex.part.sometimes)
    if (ex.cover[0].x[i] < 0.5) covered = false;
  if (!covered) {
    CHECK_THROWS_AS(leximin(ex.inst, ex.z, ex.part.sometimes, tiny), CoverageError);
  }
}

TEST_CASE("leximin: coverage error on a pool missing an agent") {
  Prepared ex = prepare(example_knapsack());
  SolutionPool missing;
  missing.z_star = ex.z;
  missing.add({{1, 0, 0, 0}, {}, 4.0});  // covers only agent 0
  CHECK_THROWS_AS(leximin(ex.inst, ex.z, ex.part.sometimes, missing), CoverageError);
}

TEST_CASE("nash: golden distributions and KKT certificate") {
  Prepared ex = prepare(example_knapsack());
  RuleReport rep = minimize_convex(ex.inst, ex.z, ex.part.sometimes, ConvexObjective::nash(),
                                   ex.cover);
  CHECK(rep.distribution[0] == doctest::Approx(0.25).epsilon(1e-5));
  CHECK(rep.distribution[1] == doctest::Approx(0.75).epsilon(1e-5));
  CHECK(rep.distribution[2] == doctest::Approx(0.375).epsilon(1e-5));
  CHECK(rep.distribution[3] == doctest::Approx(0.375).epsilon(1e-5));
  CHECK(rep.kkt_residual <= 1e-5);
  CHECK(rep.condition_slack >= -1e-5);
  CHECK(realizes(rep.pool, rep.lottery, rep.distribution, 1e-5));

  Prepared in = prepare(intro_knapsack());
  RuleReport repi = minimize_convex(in.inst, in.z, in.part.sometimes, ConvexObjective::nash(),
                                    in.cover);
  CHECK(repi.distribution[0] == doctest::Approx(0.375).epsilon(1e-5));
  for (int i = 1; i < 4; ++i) CHECK(repi.distribution[i] == doctest::Approx(0.75).epsilon(1e-5));

  SUBCASE("singleton pool terminates at the first pricing check") {
    IlpInstance forced;
    forced.n_agents = 2;
    forced.agent_objective = {2, 1};
    forced.agent_domain.assign(2, VarDomain::binary());
    forced.rows.push_back({{{0, 1.0}, {1, 1.0}}, Rel::le, 1.0});
    Prepared f = prepare(std::move(forced));
    RuleReport repf =
        minimize_convex(f.inst, f.z, f.part.sometimes, ConvexObjective::nash(), f.cover);
    CHECK(repf.iterations == 1);
    CHECK(repf.distribution[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("colgen rules match the brute-force oracles on random instances") {
  int checked = 0;
  for (std::uint64_t seed = 500; checked < 12 && seed < 560; ++seed) {
    IlpInstance inst = random_dichotomous(seed);
    auto [sol, z] = solve_optimal(inst);
    SolutionPool pool = enumerate_optimal(inst, z, 2048);
    REQUIRE(pool.complete);
    AgentPartition part = partition_agents(inst, z);
    if (part.sometimes.empty()) continue;
    ++checked;
    SolutionPool cover = greedy_cover(inst, z, part.sometimes);

    RuleReport lex = leximin(inst, z, part.sometimes, cover);
    Distribution lex_o = brute_force_rule(pool, BruteForceRule::leximin());
    for (int i = 0; i < inst.n_agents; ++i)
      CHECK(lex.distribution[i] == doctest::Approx(lex_o[i]).epsilon(1e-5));

    RuleReport nash = minimize_convex(inst, z, part.sometimes, ConvexObjective::nash(), cover);
    Distribution nash_o = brute_force_rule(pool, BruteForceRule::nash());
    for (int i = 0; i < inst.n_agents; ++i)
      CHECK(nash.distribution[i] == doctest::Approx(nash_o[i]).epsilon(1e-5));

    RuleReport mm = maximin(inst, z, part.sometimes, cover);
    CHECK(mm.first_stage_value ==
          doctest::Approx(brute_force_maximin_value(pool)).epsilon(1e-5));
    CHECK(lex.first_stage_value ==
          doctest::Approx(brute_force_maximin_value(pool)).epsilon(1e-5));
  }
  CHECK(checked == 12);
}

TEST_CASE("nash: individual fair share and Pareto efficiency") {
  for (std::uint64_t seed : {61u, 62u, 63u, 64u}) {
    IlpInstance inst = random_dichotomous(seed, 8);
    auto [sol, z] = solve_optimal(inst);
    AgentPartition part = partition_agents(inst, z);
    if (part.sometimes.empty()) continue;
    SolutionPool cover = greedy_cover(inst, z, part.sometimes);
    RuleReport nash = minimize_convex(inst, z, part.sometimes, ConvexObjective::nash(), cover);
    double share = 1.0 / static_cast<double>(part.sometimes.size());
    for (int i : part.sometimes) CHECK(nash.distribution[i] >= share - 1e-6);

    // no realizable distribution dominates: check over the complete pool
    SolutionPool pool = enumerate_optimal(inst, z, 2048);
    REQUIRE(pool.complete);
    LinearProgram lp;
    for (int s = 0; s < pool.size(); ++s) lp.add_var(0.0, 0.0, kInf);
    std::vector<int> surplus;
    for (size_t mi = 0; mi < part.sometimes.size(); ++mi)
      surplus.push_back(lp.add_var(1.0, 0.0, kInf));
    for (size_t mi = 0; mi < part.sometimes.size(); ++mi) {
      int i = part.sometimes[mi];
      LinearRow row;
      for (int s = 0; s < pool.size(); ++s)
        if (pool[s].x[i] != 0.0) row.coeffs.push_back({s, pool[s].x[i]});
      row.coeffs.push_back({surplus[mi], -1.0});
      row.rel = Rel::ge;  // allow d' >= d with surplus measured
      row.rhs = nash.distribution[i];
      lp.rows.push_back(row);
    }
    LinearRow conv;
    for (int s = 0; s < pool.size(); ++s) conv.coeffs.push_back({s, 1.0});
    conv.rel = Rel::eq;
    conv.rhs = 1.0;
    lp.rows.push_back(conv);
    LpSolution res = solve_lp(lp);
    REQUIRE(res.ok());
    CHECK(res.objective <= 1e-6);  // no aggregate improvement possible
  }
}

TEST_CASE("convex objectives: gradients match central finite differences") {
  CounterRng rng(321);
  std::vector<int> M = {0, 1, 2, 3, 4};
  Bounds norm;
  norm.dystopia = {-2, -1, 0, -3, -0.5};
  norm.utopia = {1, 2, 1, 0, 0.5};
  norm.varying = M;

  auto check_gradient = [&](const ConvexObjective& obj) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> d(M.size());
      for (size_t i = 0; i < M.size(); ++i) {
        double lo = obj.normalization ? norm.dystopia[i] : 0.0;
        double hi = obj.normalization ? norm.utopia[i] : 1.0;
        d[i] = lo + (hi - lo) * rng.uniform(0.2, 0.8);
      }
      std::vector<double> g = obj.gradient(M, d);
      const double h = 1e-6;
      for (size_t i = 0; i < M.size(); ++i) {
        std::vector<double> dp = d, dm = d;
        dp[i] += h;
        dm[i] -= h;
        double fd = (obj.value(M, dp) - obj.value(M, dm)) / (2 * h);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-4));
      }
    }
  };

  check_gradient(ConvexObjective::nash());
  check_gradient(ConvexObjective::nash(norm, true));
  check_gradient(ConvexObjective::knorm(2.0));
  check_gradient(ConvexObjective::knorm(3.0, norm));
}

TEST_CASE("knorm objective runs through the colgen engine") {
  Prepared ex = prepare(example_knapsack());
  RuleReport rep = minimize_convex(ex.inst, ex.z, ex.part.sometimes, ConvexObjective::knorm(2.0),
                                   ex.cover);
  SolutionPool pool = enumerate_optimal(ex.inst, ex.z, 100);
  Distribution oracle = brute_force_rule(pool, BruteForceRule::knorm(2.0));
  for (int i = 0; i < ex.inst.n_agents; ++i)
    CHECK(rep.distribution[i] == doctest::Approx(oracle[i]).epsilon(1e-4));
}

TEST_CASE("leximin with normalization: Kalai-Smorodinsky on a tardiness toy") {
  TardinessInstance toy;
  toy.processing = {2, 2};
  toy.due = {2, 2};
  IlpInstance inst = build_tardiness_ilp(toy);
  auto [sol, z] = solve_optimal(inst);
  SolutionPool witnesses;
  Bounds b = compute_bounds(inst, z, {}, &witnesses);
  RuleReport rep = leximin(inst, z, b.varying, witnesses, b);
  CHECK(rep.first_stage_value == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(rep.distribution[0] == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(rep.distribution[1] == doctest::Approx(-1.0).epsilon(1e-4));
}
