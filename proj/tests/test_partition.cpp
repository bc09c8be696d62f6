#include <doctest.h>

#include "fairlot/enumeration.hpp"
#include "fairlot/partition.hpp"
#include "test_helpers.hpp"

using namespace fairlot;
using namespace testutil;

TEST_CASE("partition: golden examples") {
  IlpInstance ex = example_knapsack();
  AgentPartition p = partition_agents(ex, 4.0);
  CHECK(p.always.empty());
  CHECK(p.never.empty());
  CHECK(p.sometimes.size() == 4);
  CHECK(p.solver_calls <= 5);

  AgentPartition pi = partition_agents(intro_knapsack(), 3.0);
  CHECK(pi.sometimes.size() == 4);
  CHECK(pi.solver_calls <= 5);

  // forced variables: max x1 s.t. x1 = 1, x2 <= 0
  IlpInstance forced;
  forced.n_agents = 2;
  forced.agent_objective = {1, 0};
  forced.agent_domain.assign(2, VarDomain::binary());
  forced.rows.push_back({{{0, 1.0}}, Rel::eq, 1.0});
  forced.rows.push_back({{{1, 1.0}}, Rel::le, 0.0});
  auto [fs, fz] = solve_optimal(forced);
  AgentPartition pf = partition_agents(forced, fz);
  CHECK(pf.always == std::vector<int>{0});
  CHECK(pf.never == std::vector<int>{1});
  CHECK(pf.sometimes.empty());
}

TEST_CASE("partition: agrees with exhaustive enumeration") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    IlpInstance inst = random_dichotomous(seed);
    double z;
    auto optima = exhaustive_binary_optima(inst, &z);
    AgentPartition p = partition_agents(inst, z);
    CHECK(p.solver_calls <= inst.n_agents + 1);
    for (int i = 0; i < inst.n_agents; ++i) {
      bool ever1 = false, ever0 = false;
      for (const auto& x : optima) (x[i] > 0.5 ? ever1 : ever0) = true;
      bool inY = std::find(p.always.begin(), p.always.end(), i) != p.always.end();
      bool inN = std::find(p.never.begin(), p.never.end(), i) != p.never.end();
      bool inM = std::find(p.sometimes.begin(), p.sometimes.end(), i) != p.sometimes.end();
      CHECK(inY == (ever1 && !ever0));
      CHECK(inN == (!ever1 && ever0));
      CHECK(inM == (ever1 && ever0));
    }
    // every witness harvested along the way is optimal
    for (const auto& s : p.witness_pool.solutions())
      CHECK(s.objective == doctest::Approx(z).epsilon(1e-9));
  }
}

TEST_CASE("partition: witness pool covers M") {
  IlpInstance ex = intro_knapsack();
  AgentPartition p = partition_agents(ex, 3.0);
  for (int i : p.sometimes) {
    bool covered = false;
    for (const auto& s : p.witness_pool.solutions())
      if (s.x[i] > 0.5) covered = true;
    CHECK(covered);
  }
}

TEST_CASE("compute_bounds: dichotomous degenerates to the partition") {
  IlpInstance ex = example_knapsack();
  Bounds b = compute_bounds(ex, 4.0);
  for (int i = 0; i < 4; ++i) {
    CHECK(b.utopia[i] == doctest::Approx(1.0));
    CHECK(b.dystopia[i] == doctest::Approx(0.0));
  }
  CHECK(b.varying.size() == 4);

  // unique optimum: utopia == dystopia == x*
  IlpInstance forced;
  forced.n_agents = 2;
  forced.agent_objective = {2, 1};
  forced.agent_domain.assign(2, VarDomain::binary());
  forced.rows.push_back({{{0, 1.0}, {1, 1.0}}, Rel::le, 1.0});
  auto [fs, fz] = solve_optimal(forced);
  Bounds fb = compute_bounds(forced, fz);
  CHECK(fb.varying.empty());
  CHECK(fb.utopia[0] == doctest::Approx(1.0));
  CHECK(fb.dystopia[0] == doctest::Approx(1.0));
  CHECK(fb.utopia[1] == doctest::Approx(0.0));
}

TEST_CASE("compute_bounds: two-job tardiness toy") {
  TardinessInstance toy;
  toy.processing = {2, 2};
  toy.due = {2, 2};
  IlpInstance inst = build_tardiness_ilp(toy);
  auto [sol, z] = solve_optimal(inst);
  CHECK(z == doctest::Approx(-2.0));
  SolutionPool witnesses;
  Bounds b = compute_bounds(inst, z, {}, &witnesses);
  CHECK(b.utopia[0] == doctest::Approx(0.0));
  CHECK(b.utopia[1] == doctest::Approx(0.0));
  CHECK(b.dystopia[0] == doctest::Approx(-2.0));
  CHECK(b.dystopia[1] == doctest::Approx(-2.0));
  CHECK(b.varying.size() == 2);
  CHECK(witnesses.size() >= 2);

  SUBCASE("in dichotomous mode ranges are exactly one on M") {
    IlpInstance ex = intro_knapsack();
    Bounds eb = compute_bounds(ex, 3.0);
    for (int i = 0; i < ex.n_agents; ++i) {
      bool inM = std::find(eb.varying.begin(), eb.varying.end(), i) != eb.varying.end();
      CHECK(eb.range(i) == doctest::Approx(inM ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("partition under a near-optimality bound") {
  // eps = 0.25 on the example knapsack admits value-3 solutions; agent 2's
  // zero solution (0,0,1,1) has value 2 and stays excluded.
  IlpInstance ex = example_knapsack();
  AgentPartition p = partition_agents(ex, 4.0, {}, {0.25, 0.0});
  CHECK(p.sometimes.size() == 4);
  SolutionPool pool = enumerate_optimal(ex, 4.0, 100, {}, {0.25, 0.0});
  for (const auto& s : pool.solutions()) CHECK(s.objective >= 3.0 - 1e-9);
}
