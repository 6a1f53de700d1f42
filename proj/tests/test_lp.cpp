#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "randcert/error.hpp"
#include "randcert/lp.hpp"

using namespace randcert::lp;

TEST_CASE("single variable maximum") {
  LinearProgram lp;
  lp.add_variable();
  lp.add_row({{0, 1.0}}, Relation::LessEqual, 1.0);
  lp.objective = {{0, 1.0}};
  lp.sense = Sense::Maximize;
  for (Route route : {Route::Primal, Route::Dual}) {
    for (bool pre : {true, false}) {
      SolverOptions opt;
      opt.route = route;
      opt.presolve = pre;
      auto res = solve_lp(lp, opt);
      REQUIRE(res.status == Status::Optimal);
      CHECK(res.optimum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("contradictory bounds are infeasible") {
  LinearProgram lp;
  lp.add_variable(-kInf, kInf);
  lp.add_row({{0, 1.0}}, Relation::GreaterEqual, 2.0);
  lp.add_row({{0, 1.0}}, Relation::LessEqual, 1.0);
  for (Route route : {Route::Primal, Route::Dual}) {
    for (bool pre : {true, false}) {
      SolverOptions opt;
      opt.route = route;
      opt.presolve = pre;
      CHECK(solve_lp(lp, opt).status == Status::Infeasible);
    }
  }
}

TEST_CASE("unbounded direction is reported") {
  LinearProgram lp;
  lp.add_variable();
  lp.add_variable();
  lp.add_row({{0, 1.0}, {1, -1.0}}, Relation::LessEqual, 1.0);
  lp.objective = {{0, 1.0}, {1, 1.0}};
  lp.sense = Sense::Maximize;
  for (Route route : {Route::Primal, Route::Dual}) {
    SolverOptions opt;
    opt.route = route;
    opt.presolve = false;
    CHECK(solve_lp(lp, opt).status == Status::Unbounded);
  }
}

TEST_CASE("transportation toy matches vertex enumeration") {
  // Two supplies (3, 4) into one demand node of capacity 5 with three routes.
  LinearProgram lp;
  for (int j = 0; j < 3; ++j) lp.add_variable();
  lp.add_row({{0, 1.0}, {1, 1.0}}, Relation::LessEqual, 3.0);
  lp.add_row({{2, 1.0}}, Relation::LessEqual, 4.0);
  lp.add_row({{0, 1.0}, {1, 1.0}, {2, 1.0}}, Relation::LessEqual, 5.0);
  lp.objective = {{0, 2.0}, {1, 3.0}, {2, 1.0}};
  lp.sense = Sense::Maximize;
  auto want = oracle::vertex_enumeration(lp);
  REQUIRE(want.feasible);
  CHECK(want.best == doctest::Approx(11.0));
  auto res = solve_lp(lp);
  REQUIRE(res.status == Status::Optimal);
  CHECK(std::abs(res.optimum - want.best) <= 1e-9);
}

TEST_CASE("random small programs agree with vertex enumeration") {
  std::mt19937_64 rng(20240611);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    LinearProgram lp = oracle::random_small_lp(rng, trial < 150 ? 5 : 8, 12);
    auto want = oracle::vertex_enumeration(lp);
    for (Route route : {Route::Primal, Route::Dual}) {
      for (bool pre : {true, false}) {
        SolverOptions opt;
        opt.route = route;
        opt.presolve = pre;
        auto res = solve_lp(lp, opt);
        CAPTURE(trial);
        CAPTURE(static_cast<int>(route));
        CAPTURE(pre);
        if (want.feasible) {
          REQUIRE(res.status == Status::Optimal);
          CHECK(std::abs(res.optimum - want.best) <= 1e-9);
          CHECK(res.max_residual <= 1e-8);
        } else {
          CHECK(res.status == Status::Infeasible);
        }
      }
    }
    (want.feasible ? feasible : infeasible)++;
  }
  CHECK(feasible > 50);
  CHECK(infeasible > 5);
}

TEST_CASE("farkas multipliers confirm infeasibility exactly") {
  std::mt19937_64 rng(7);
  int confirmed = 0;
  for (int trial = 0; trial < 200; ++trial) {
    LinearProgram lp = oracle::random_small_lp(rng, 6, 12);
    for (std::size_t j = 0; j < lp.num_vars; ++j)
      if (!std::isfinite(lp.upper[j])) lp.upper[j] = 10.0;
    SolverOptions opt;
    opt.farkas = true;
    auto res = solve_lp(lp, opt);
    if (res.status != Status::Infeasible) continue;
    REQUIRE(res.farkas.size() == lp.rows.size());
    CHECK(verify_farkas_exact(lp, res.farkas));
    ++confirmed;
  }
  CHECK(confirmed > 5);
}

TEST_CASE("verify_assignment tracks perturbations") {
  LinearProgram lp;
  lp.add_variable();
  lp.add_variable();
  lp.add_row({{0, 1.0}, {1, 1.0}}, Relation::Equal, 1.0);
  auto base = verify_assignment(lp, {0.25, 0.75});
  CHECK(base.max_violation <= 1e-15);
  for (double delta : {1e-6, 1e-3, 0.1}) {
    auto rep = verify_assignment(lp, {0.25 + delta, 0.75});
    CHECK(rep.max_violation == doctest::Approx(delta).epsilon(1e-9));
  }
  CHECK_THROWS_AS(verify_assignment(lp, {0.5}), randcert::Error);
}

TEST_CASE("solution import re-verifies") {
  LinearProgram lp;
  lp.add_variable();
  lp.add_row({{0, 1.0}}, Relation::LessEqual, 1.0);
  lp.objective = {{0, 1.0}};
  lp.sense = Sense::Maximize;
  const std::string path = "lp_import_test.sol";
  {
    std::ofstream(path) << "1\n";
  }
  auto ok = import_solution(lp, path);
  CHECK(ok.status == Status::Optimal);
  CHECK(ok.optimum == 1.0);

  LinearProgram eq;
  eq.add_variable();
  eq.add_variable();
  eq.add_row({{0, 1.0}, {1, 1.0}}, Relation::Equal, 1.0);
  {
    std::ofstream(path) << "0.5\n0.501\n";
  }
  auto bad = import_solution(eq, path);
  CHECK(bad.status == Status::Numerical);
  CHECK(bad.max_residual == doctest::Approx(1e-3).epsilon(1e-6));
  {
    std::ofstream(path) << "0.5\n";
  }
  CHECK_THROWS_AS(import_solution(eq, path), randcert::Error);
  std::remove(path.c_str());
}

TEST_CASE("mps export is deterministic and complete") {
  LinearProgram lp;
  lp.add_variable();
  lp.add_variable(-kInf, kInf);
  lp.add_variable(-1.0, 2.0);
  lp.add_variable(0.5, 0.5);
  lp.add_row({{0, 1.0}, {1, 0.1}}, Relation::LessEqual, 1.0);
  lp.add_row({{1, 1.0}, {2, -1.0}}, Relation::GreaterEqual, -0.3);
  lp.add_row({{2, 1.0}, {3, 1.0}}, Relation::Equal, 1.0);
  lp.objective = {{0, 1.0}, {2, 1.0 / 3.0}};
  lp.sense = Sense::Maximize;
  const std::string a = to_mps(lp), b = to_mps(lp);
  CHECK(a == b);
  CHECK(a.find("NAME") != std::string::npos);
  CHECK(a.find("ROWS") != std::string::npos);
  CHECK(a.find("COLUMNS") != std::string::npos);
  CHECK(a.find("RHS") != std::string::npos);
  CHECK(a.find("BOUNDS") != std::string::npos);
  CHECK(a.find("ENDATA") != std::string::npos);
  CHECK(a.find(" FR BND x1") != std::string::npos);
  CHECK(a.find(" FX BND x3 0.5") != std::string::npos);
  CHECK(a.find("-0.33333333333333331") != std::string::npos);
}
