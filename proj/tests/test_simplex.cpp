#include <doctest.h>

#include "fairlot/mip.hpp"
#include "fairlot/rng.hpp"
#include "fairlot/simplex.hpp"

using namespace fairlot;

TEST_CASE("lp: basic maximization with duals") {
  LinearProgram lp;
  lp.add_var(3, 0, kInf);
  lp.add_var(2, 0, kInf);
  lp.add_row({{0, 1}, {1, 1}}, Rel::le, 4);
  lp.add_row({{0, 1}, {1, 3}}, Rel::le, 6);
  LpSolution s = solve_lp(lp);
  REQUIRE(s.ok());
  CHECK(s.objective == doctest::Approx(12.0));
  CHECK(s.x[0] == doctest::Approx(4.0));
  CHECK(s.x[1] == doctest::Approx(0.0));
  CHECK(s.row_duals[0] == doctest::Approx(3.0));
  CHECK(s.row_duals[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("lp: equality and >= rows under minimization") {
  LinearProgram lp;
  lp.maximize = false;
  lp.add_var(1, 0, 10);
  lp.add_var(1, 0, 10);
  lp.add_row({{0, 1}, {1, 2}}, Rel::ge, 4);
  lp.add_row({{0, 1}, {1, -1}}, Rel::eq, 1);
  LpSolution s = solve_lp(lp);
  REQUIRE(s.ok());
  CHECK(s.objective == doctest::Approx(3.0));
  CHECK(s.x[0] == doctest::Approx(2.0));
  CHECK(s.x[1] == doctest::Approx(1.0));
}

TEST_CASE("lp: infeasible and unbounded detection") {
  LinearProgram bad;
  bad.add_var(1, 0, 1);
  bad.add_row({{0, 1}}, Rel::ge, 1);
  bad.add_row({{0, 1}}, Rel::le, 0);
  CHECK(solve_lp(bad).status == LpStatus::infeasible);

  LinearProgram free_ray;
  free_ray.add_var(1, 0, kInf);
  CHECK(solve_lp(free_ray).status == LpStatus::unbounded);
}

TEST_CASE("lp: negative lower bounds and fixed variables") {
  LinearProgram lp;
  lp.add_var(1, -5, -1);
  lp.add_var(1, -3, 8);
  lp.add_var(2, 4, 4);  // fixed
  lp.add_row({{0, 1}, {1, 1}}, Rel::le, 0);
  LpSolution s = solve_lp(lp);
  REQUIRE(s.ok());
  CHECK(s.objective == doctest::Approx(0.0 + 8.0));
  CHECK(s.x[2] == doctest::Approx(4.0));
}

TEST_CASE("lp: random programs satisfy duality identities") {
  CounterRng rng(424242);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + static_cast<int>(rng.next_below(6));
    int m = 1 + static_cast<int>(rng.next_below(5));
    LinearProgram lp;
    for (int j = 0; j < n; ++j) {
      double lo = -static_cast<double>(rng.next_below(4));
      double hi = lo + 1 + static_cast<double>(rng.next_below(5));
      lp.add_var(rng.uniform(-3, 3), lo, rng.next_below(4) == 0 ? kInf : hi);
    }
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<int, double>> co;
      double act = 0;
      for (int j = 0; j < n; ++j) {
        double a = rng.uniform(-3, 3);
        if (std::abs(a) < 0.3) continue;
        co.push_back({j, a});
        act += a * lp.lower[j];  // anchor point: all variables at lower bound
      }
      switch (rng.next_below(3)) {
        case 0: lp.add_row(co, Rel::le, act + static_cast<double>(rng.next_below(3))); break;
        case 1: lp.add_row(co, Rel::ge, act - static_cast<double>(rng.next_below(3))); break;
        default: lp.add_row(co, Rel::eq, act);
      }
    }
    LpSolution s = solve_lp(lp);
    if (s.status == LpStatus::unbounded) continue;
    REQUIRE(s.status == LpStatus::optimal);  // anchor keeps it feasible
    ++solved;

    std::vector<double> rc = lp.objective;
    for (size_t i = 0; i < lp.rows.size(); ++i)
      for (auto [j, a] : lp.rows[i].coeffs) rc[j] -= s.row_duals[i] * a;
    double lagrangian = 0;
    for (int j = 0; j < n; ++j) {
      lagrangian += rc[j] * s.x[j];
      bool at_lo = std::abs(s.x[j] - lp.lower[j]) < 1e-7;
      bool at_hi = lp.upper[j] < kInf && std::abs(s.x[j] - lp.upper[j]) < 1e-7;
      if (!at_lo && !at_hi) CHECK(std::abs(rc[j]) < 1e-6);
      if (at_lo && !at_hi) CHECK(rc[j] < 1e-6);
      if (at_hi && !at_lo) CHECK(rc[j] > -1e-6);
    }
    for (size_t i = 0; i < lp.rows.size(); ++i) {
      double lhs = 0;
      for (auto [j, a] : lp.rows[i].coeffs) lhs += a * s.x[j];
      if (lp.rows[i].rel == Rel::le) {
        CHECK(lhs <= lp.rows[i].rhs + 1e-7);
        CHECK(s.row_duals[i] >= -1e-7);
      }
      if (lp.rows[i].rel == Rel::ge) {
        CHECK(lhs >= lp.rows[i].rhs - 1e-7);
        CHECK(s.row_duals[i] <= 1e-7);
      }
      if (lp.rows[i].rel == Rel::eq) CHECK(std::abs(lhs - lp.rows[i].rhs) < 1e-7);
      CHECK(std::abs(s.row_duals[i] * (lp.rows[i].rhs - lhs)) < 1e-6);
      lagrangian += s.row_duals[i] * lp.rows[i].rhs;
    }
    CHECK(lagrangian == doctest::Approx(s.objective).epsilon(1e-6));
  }
  CHECK(solved > 100);
}

TEST_CASE("mip: random binary programs match exhaustive search") {
  CounterRng rng(777);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 3 + static_cast<int>(rng.next_below(8));
    int m = 1 + static_cast<int>(rng.next_below(4));
    LinearProgram lp;
    for (int j = 0; j < n; ++j)
      lp.add_var(static_cast<double>(rng.next_below(7)) - 2.0, 0, 1);
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<int, double>> co;
      for (int j = 0; j < n; ++j) {
        double a = static_cast<double>(rng.next_below(5)) - 1.0;
        if (a != 0) co.push_back({j, a});
      }
      Rel rel = rng.next_below(3) == 0 ? Rel::ge : Rel::le;
      double rhs = static_cast<double>(rng.next_below(2 * n)) - (rel == Rel::ge ? n : 0);
      lp.add_row(co, rel, rhs);
    }
    MipSolution got = solve_mip(lp, std::vector<bool>(n, true));

    double best = -kInf;
    for (long mask = 0; mask < (1L << n); ++mask) {
      bool feas = true;
      for (const auto& row : lp.rows) {
        double lhs = 0;
        for (auto [j, a] : row.coeffs)
          if (mask >> j & 1) lhs += a;
        if (row.rel == Rel::le && lhs > row.rhs + 1e-9) feas = false;
        if (row.rel == Rel::ge && lhs < row.rhs - 1e-9) feas = false;
      }
      if (!feas) continue;
      double obj = 0;
      for (int j = 0; j < n; ++j)
        if (mask >> j & 1) obj += lp.objective[j];
      best = std::max(best, obj);
    }
    if (best == -kInf) {
      CHECK(got.status == MipStatus::infeasible);
    } else {
      REQUIRE(got.status == MipStatus::optimal);
      CHECK(got.objective == doctest::Approx(best).epsilon(1e-9));
    }
  }
}

TEST_CASE("mip: mixed-integer solution reoptimizes the continuous part") {
  // max 3y + x, y binary, x in [0, 2.5], x + y <= 3, x <= 2y
  LinearProgram lp;
  lp.add_var(1, 0, 2.5);
  lp.add_var(3, 0, 1);
  lp.add_row({{0, 1}, {1, 1}}, Rel::le, 3);
  lp.add_row({{0, 1}, {1, -2}}, Rel::le, 0);
  MipSolution s = solve_mip(lp, {false, true});
  REQUIRE(s.status == MipStatus::optimal);
  CHECK(s.x[1] == doctest::Approx(1.0));
  CHECK(s.x[0] == doctest::Approx(2.0));
  CHECK(s.objective == doctest::Approx(5.0));
}

TEST_CASE("mip: bound abort reports no solution above the threshold") {
  // max x1 + x2 <= capacity 1: optimum 1
  LinearProgram lp;
  lp.add_var(1, 0, 1);
  lp.add_var(1, 0, 1);
  lp.add_row({{0, 1}, {1, 1}}, Rel::le, 1);
  MipOptions opt;
  opt.bound_abort = 1.5;  // nothing reaches 1.5
  MipSolution s = solve_mip(lp, {true, true}, opt);
  CHECK(s.status == MipStatus::bound_abort);

  MipOptions opt2;
  opt2.incumbent_stop = 0.5;  // first incumbent at value >= 0.5 suffices
  MipSolution s2 = solve_mip(lp, {true, true}, opt2);
  CHECK(s2.feasible());
  CHECK(s2.objective >= 0.5);
}
