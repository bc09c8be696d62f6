#include <doctest.h>

#include <sstream>

#include "fairlot/enumeration.hpp"
#include "fairlot/instances.hpp"
#include "fairlot/json_io.hpp"
#include "fairlot/partition.hpp"
#include "test_helpers.hpp"

using namespace fairlot;
using namespace testutil;

TEST_CASE("gen_kidney: determinism and degenerate parameter regimes") {
  KidneyInstance a = gen_kidney(12, 99);
  KidneyInstance b = gen_kidney(12, 99);
  CHECK(a.arcs == b.arcs);
  CHECK(a.cycles == b.cycles);

  KidneyParams universal;
  universal.blood_type_freq = {1.0, 0.0, 0.0, 0.0};  // all type O
  universal.pra_levels = {0.0};
  universal.pra_freq = {1.0};
  universal.require_incompatible_pair = false;
  KidneyInstance full = gen_kidney(3, 1, universal);
  CHECK(full.arcs.size() == 6);    // complete digraph on 3 nodes
  CHECK(full.cycles.size() == 5);  // three 2-cycles and two 3-cycles

  KidneyParams blocked;
  blocked.pra_levels = {1.0};  // every crossmatch fails
  blocked.pra_freq = {1.0};
  blocked.require_incompatible_pair = false;
  KidneyInstance none = gen_kidney(4, 1, blocked);
  CHECK(none.arcs.empty());
  CHECK(none.cycles.empty());
  IlpInstance ni = build_kidney_ilp(none);
  auto [ns, nz] = solve_optimal(ni);
  CHECK(nz == doctest::Approx(0.0));
  AgentPartition np = partition_agents(ni, nz);
  CHECK(static_cast<int>(np.never.size()) == 4);
}

TEST_CASE("cycle enumeration matches a brute-force search on random digraphs") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CounterRng rng(seed);
    int n = 4 + static_cast<int>(rng.next_below(9));  // up to 12 nodes
    std::vector<std::pair<int, int>> arcs;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b && rng.next_double() < 0.3) arcs.push_back({a, b});
    auto cycles = enumerate_cycles(n, arcs, 3);

    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (auto [a, b] : arcs) adj[a][b] = 1;
    long expect = 0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (adj[a][b] && adj[b][a]) ++expect;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          if (a < b && a < c && b != c && adj[a][b] && adj[b][c] && adj[c][a]) ++expect;
        }
    CHECK(static_cast<long>(cycles.size()) == expect);
    for (const auto& cyc : cycles) {
      CHECK(cyc.size() <= 3);
      for (size_t i = 0; i < cyc.size(); ++i) CHECK(adj[cyc[i]][cyc[(i + 1) % cyc.size()]]);
    }
  }
}

TEST_CASE("build_kidney_ilp: golden micro-instances") {
  SUBCASE("single 3-cycle: all three matched, M empty") {
    KidneyInstance ke;
    ke.n_pairs = 3;
    ke.arcs = {{0, 1}, {1, 2}, {2, 0}};
    ke.cycles = enumerate_cycles(3, ke.arcs, 3);
    REQUIRE(ke.cycles.size() == 1);
    IlpInstance inst = build_kidney_ilp(ke);
    auto [sol, z] = solve_optimal(inst);
    CHECK(z == doctest::Approx(3.0));
    SolutionPool pool = enumerate_optimal(inst, z, 10);
    CHECK(pool.size() == 1);
    AgentPartition p = partition_agents(inst, z);
    CHECK(p.sometimes.empty());
    CHECK(p.always.size() == 3);
  }

  SUBCASE("two disjoint 2-cycles add up") {
    KidneyInstance ke;
    ke.n_pairs = 4;
    ke.arcs = {{0, 1}, {1, 0}, {2, 3}, {3, 2}};
    ke.cycles = enumerate_cycles(4, ke.arcs, 3);
    IlpInstance inst = build_kidney_ilp(ke);
    auto [sol, z] = solve_optimal(inst);
    CHECK(z == doctest::Approx(4.0));
  }

  SUBCASE("chain of 2-cycles: middle pair always matched") {
    KidneyInstance ke;
    ke.n_pairs = 3;
    ke.arcs = {{0, 1}, {1, 0}, {1, 2}, {2, 1}};
    ke.cycles = enumerate_cycles(3, ke.arcs, 3);
    IlpInstance inst = build_kidney_ilp(ke);
    auto [sol, z] = solve_optimal(inst);
    CHECK(z == doctest::Approx(2.0));
    AgentPartition p = partition_agents(inst, z);
    CHECK(p.always == std::vector<int>{1});
    CHECK(p.sometimes == std::vector<int>{0, 2});
  }
}

TEST_CASE("gen_tardiness: sampling ranges and determinism") {
  TardinessInstance a = gen_tardiness(10, 0.05, 7);
  TardinessInstance b = gen_tardiness(10, 0.05, 7);
  CHECK(a.processing == b.processing);
  CHECK(a.due == b.due);
  for (int j = 0; j < 10; ++j) {
    CHECK(a.processing[j] >= 1);
    CHECK(a.processing[j] <= 10);
    CHECK(a.due[j] >= 0);
    CHECK(a.due[j] <= 0.05 * a.horizon());
  }

  TardinessInstance single = gen_tardiness(1, 0.5, 3);
  IlpInstance si = build_tardiness_ilp(single);
  auto [ss, sz] = solve_optimal(si);
  SolutionPool witnesses;
  Bounds sb = compute_bounds(si, sz, {}, &witnesses);
  CHECK(sb.varying.empty());  // a single job has a unique schedule

  CHECK_THROWS_AS(gen_tardiness(0, 0.5, 1), ConfigError);
  CHECK_THROWS_AS(gen_tardiness(3, 0.0, 1), ConfigError);
}

TEST_CASE("build_tardiness_ilp: golden toys") {
  SUBCASE("two symmetric late jobs") {
    TardinessInstance toy;
    toy.processing = {2, 2};
    toy.due = {2, 2};
    IlpInstance inst = build_tardiness_ilp(toy);
    auto [sol, z] = solve_optimal(inst);
    CHECK(z == doctest::Approx(-2.0));
    Bounds b = compute_bounds(inst, z);
    CHECK(b.utopia == std::vector<double>{0.0, 0.0});
    CHECK(b.dystopia == std::vector<double>{-2.0, -2.0});
  }

  SUBCASE("single early job") {
    TardinessInstance toy;
    toy.processing = {5};
    toy.due = {10};
    IlpInstance inst = build_tardiness_ilp(toy);
    auto [sol, z] = solve_optimal(inst);
    CHECK(z == doctest::Approx(0.0));
    CHECK(sol.x[0] == doctest::Approx(0.0));
  }

  SUBCASE("both orders on time: M empty") {
    TardinessInstance toy;
    toy.processing = {1, 1};
    toy.due = {2, 2};
    IlpInstance inst = build_tardiness_ilp(toy);
    auto [sol, z] = solve_optimal(inst);
    CHECK(z == doctest::Approx(0.0));
    Bounds b = compute_bounds(inst, z);
    CHECK(b.varying.empty());
  }
}

TEST_CASE("tardiness optima satisfy x_j = -max(C_j - d_j, 0)") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    TardinessInstance tt = gen_tardiness(5, 0.4, seed);
    for (int& p : tt.processing) p = 1 + p % 3;  // keep the horizon small
    for (size_t j = 0; j < tt.due.size(); ++j) tt.due[j] %= tt.horizon() + 1;
    IlpInstance inst = build_tardiness_ilp(tt);
    auto [sol, z] = solve_optimal(inst);
    auto [best, vectors] = permutation_schedule_oracle(tt);
    CHECK(z == doctest::Approx(best));

    // recover the schedule from y and check the utility linkage is tight
    int n = tt.jobs(), T = tt.horizon();
    for (int j = 0; j < n; ++j) {
      double start = 0;
      for (int t = 0; t < T; ++t) start += t * sol.y[j * T + t];
      double completion = start + tt.processing[j];
      CHECK(sol.x[j] == doctest::Approx(-std::max(0.0, completion - tt.due[j])).epsilon(1e-6));
    }
  }
}

TEST_CASE("instance files round-trip") {
  KidneyInstance ke = gen_kidney(8, 5);
  std::stringstream buf;
  write_kidney(buf, ke);
  KidneyInstance back = parse_kidney(buf);
  CHECK(back.n_pairs == ke.n_pairs);
  CHECK(back.arcs == ke.arcs);
  CHECK(back.cycles == ke.cycles);

  TardinessInstance tt = gen_tardiness(6, 0.3, 11);
  std::stringstream buf2;
  write_tardiness(buf2, tt);
  TardinessInstance tback = parse_tardiness(buf2);
  CHECK(tback.processing == tt.processing);
  CHECK(tback.due == tt.due);
}

TEST_CASE("built ILPs round-trip through the JSON format") {
  KidneyInstance ke = gen_kidney(6, 3);
  IlpInstance a = build_kidney_ilp(ke);
  IlpInstance a2 = instance_from_json(instance_to_json(a));
  CHECK(a2.n_agents == a.n_agents);
  CHECK(a2.agent_objective == a.agent_objective);
  CHECK(a2.aux_objective == a.aux_objective);
  CHECK(a2.mode == a.mode);
  REQUIRE(a2.rows.size() == a.rows.size());
  auto [s1, z1] = solve_optimal(a);
  auto [s2, z2] = solve_optimal(a2);
  CHECK(z1 == doctest::Approx(z2));

  TardinessInstance tt;
  tt.processing = {2, 1, 3};
  tt.due = {1, 2, 3};
  IlpInstance b = build_tardiness_ilp(tt);
  IlpInstance b2 = instance_from_json(instance_to_json(b));
  CHECK(b2.mode == Mode::cardinal);
  CHECK(b2.agent_domain[0].lo == b.agent_domain[0].lo);
  CHECK(b2.agent_domain[0].integral == false);
  auto [t1, v1] = solve_optimal(b);
  auto [t2, v2] = solve_optimal(b2);
  CHECK(v1 == doctest::Approx(v2));
}

TEST_CASE("pool JSON-lines round-trip") {
  SolutionPool pool = enumerate_optimal(example_knapsack(), 4.0, 100);
  std::stringstream buf;
  write_pool_jsonl(buf, pool);
  SolutionPool back = read_pool_jsonl(buf);
  CHECK(back.size() == pool.size());
  CHECK(back.complete == pool.complete);
  CHECK(back.z_star == doctest::Approx(pool.z_star));
  for (const auto& s : pool.solutions()) CHECK(back.contains_x(s.x));
}

TEST_CASE("distribution serialization uses 12 significant digits") {
  Distribution d;
  d.values = {1.0 / 3.0, 0.1234567890123456, 1e-13};
  json j = to_json(d);
  CHECK(j[0].get<double>() == doctest::Approx(1.0 / 3).epsilon(1e-11));
  CHECK(j[0].get<double>() != 1.0 / 3.0);  // truncated to 12 digits
  CHECK(j[1].get<double>() == doctest::Approx(0.123456789012).epsilon(1e-12));
}
