#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "randcert/error.hpp"
#include "randcert/lp.hpp"

using namespace randcert::lp;

TEST_CASE("product equation with two isolated roots") {
  // a * b = 0.24 with a + b = 1 holds only at a = 0.4 or a = 0.6.
  BilinearProgram bp;
  bp.add_a(0.0, 1.0);
  bp.add_b(0.0, 1.0);
  bp.add_row({{}, {}, {{0, 0, 1.0}}, Relation::Equal, 0.24});
  bp.add_row({{{0, 1.0}}, {{0, 1.0}}, {}, Relation::Equal, 1.0});
  auto res = solve_bilinear(bp);
  REQUIRE(res.feasible);
  CHECK(res.residual <= 1e-8);
  const bool root = std::abs(res.a[0] - 0.4) < 1e-6 || std::abs(res.a[0] - 0.6) < 1e-6;
  CHECK(root);
}

TEST_CASE("linear precheck detects infeasibility") {
  BilinearProgram bp;
  bp.add_a(0.0, 1.0);
  bp.add_b(0.0, 1.0);
  bp.add_row({{{0, 1.0}}, {}, {}, Relation::GreaterEqual, 2.0});
  bp.add_row({{}, {}, {{0, 0, 1.0}}, Relation::Equal, 0.5});
  auto res = solve_bilinear(bp);
  CHECK_FALSE(res.feasible);
  CHECK(res.linear_precheck == Status::Infeasible);
}

TEST_CASE("product beyond the box is never reported feasible") {
  BilinearProgram bp;
  bp.add_a(0.0, 1.0);
  bp.add_b(0.0, 1.0);
  bp.add_row({{}, {}, {{0, 0, 1.0}}, Relation::Equal, 1.5});
  BilinearOptions opt;
  opt.restarts = 6;
  auto res = solve_bilinear(bp, opt);
  CHECK_FALSE(res.feasible);
  CHECK(res.restarts_tried == 6);
}

TEST_CASE("planted instances are recovered") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto p = oracle::planted_bilinear(seed);
    REQUIRE(verify_assignment(p.program, p.a, p.b).max_violation <= 1e-12);
    BilinearOptions opt;
    opt.seed = seed;
    auto res = solve_bilinear(p.program, opt);
    CAPTURE(seed);
    CHECK(res.feasible);
    CHECK(verify_assignment(p.program, res.a, res.b).max_violation <= 1e-8);
  }
}

TEST_CASE("assignment shape is checked") {
  auto p = oracle::planted_bilinear(3);
  CHECK_THROWS_AS(verify_assignment(p.program, {0.5}, p.b), randcert::Error);
}
