#include "cbwk/simplex.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace cbwk;
using cbwk::testing::vec;

TEST_SUITE("simplex") {
  TEST_CASE("textbook maximum") {
    // max 3x + 5y  s.t.  x <= 4, 2y <= 12, 3x + 2y <= 18
    lp::Problem p;
    p.objective = vec({3.0, 5.0});
    p.rows.resize(0, 2);
    p.add_row(vec({1.0, 0.0}), lp::Sense::le, 4.0);
    p.add_row(vec({0.0, 2.0}), lp::Sense::le, 12.0);
    p.add_row(vec({3.0, 2.0}), lp::Sense::le, 18.0);
    const lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::optimal);
    CHECK(s.objective == doctest::Approx(36.0));
    CHECK(s.x.isApprox(vec({2.0, 6.0})));
  }

  TEST_CASE("equality and >= rows need phase one") {
    // max x + y  s.t.  x + y = 1, x >= 0.25, y <= 0.5
    lp::Problem p;
    p.objective = vec({1.0, 2.0});
    p.rows.resize(0, 2);
    p.add_row(vec({1.0, 1.0}), lp::Sense::eq, 1.0);
    p.add_row(vec({1.0, 0.0}), lp::Sense::ge, 0.25);
    p.add_row(vec({0.0, 1.0}), lp::Sense::le, 0.5);
    const lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::optimal);
    CHECK(s.objective == doctest::Approx(1.5));
    CHECK(s.x.isApprox(vec({0.5, 0.5})));
  }

  TEST_CASE("negative right-hand sides") {
    // max -x  s.t.  -x <= -2  (x >= 2)
    lp::Problem p;
    p.objective = vec({-1.0});
    p.rows.resize(0, 1);
    p.add_row(vec({-1.0}), lp::Sense::le, -2.0);
    const lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::optimal);
    CHECK(s.x(0) == doctest::Approx(2.0));
  }

  TEST_CASE("infeasible") {
    lp::Problem p;
    p.objective = vec({1.0});
    p.rows.resize(0, 1);
    p.add_row(vec({1.0}), lp::Sense::le, 1.0);
    p.add_row(vec({1.0}), lp::Sense::ge, 2.0);
    CHECK(lp::solve(p).status == lp::Status::infeasible);
  }

  TEST_CASE("unbounded") {
    lp::Problem p;
    p.objective = vec({1.0, 0.0});
    p.rows.resize(0, 2);
    p.add_row(vec({-1.0, 1.0}), lp::Sense::le, 1.0);
    CHECK(lp::solve(p).status == lp::Status::unbounded);
  }

  TEST_CASE("degenerate problem terminates") {
    // Beale's cycling example for Dantzig's rule.
    lp::Problem p;
    p.objective = vec({0.75, -150.0, 0.02, -6.0});
    p.rows.resize(0, 4);
    p.add_row(vec({0.25, -60.0, -0.04, 9.0}), lp::Sense::le, 0.0);
    p.add_row(vec({0.5, -90.0, -0.02, 3.0}), lp::Sense::le, 0.0);
    p.add_row(vec({0.0, 0.0, 1.0, 0.0}), lp::Sense::le, 1.0);
    const lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::optimal);
    CHECK(s.objective == doctest::Approx(0.05));
  }

  TEST_CASE("redundant equalities") {
    lp::Problem p;
    p.objective = vec({1.0, 1.0});
    p.rows.resize(0, 2);
    p.add_row(vec({1.0, 1.0}), lp::Sense::eq, 1.0);
    p.add_row(vec({2.0, 2.0}), lp::Sense::eq, 2.0);
    const lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::optimal);
    CHECK(s.objective == doctest::Approx(1.0));
  }

  TEST_CASE("malformed problems are rejected") {
    lp::Problem p;
    p.objective = vec({1.0});
    p.rows = Matrix::Ones(1, 2);
    p.rhs = vec({1.0});
    p.senses = {lp::Sense::le};
    CHECK_THROWS_AS(lp::solve(p), ArgumentError);
    CHECK(std::string(lp::to_string(lp::Status::unbounded)) == "unbounded");
  }
}
