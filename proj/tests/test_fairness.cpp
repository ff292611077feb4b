#include "cbwk/fairness.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace cbwk;
using cbwk::testing::vec;

TEST_SUITE("fairness") {
  TEST_CASE("general fairness cost construction") {
    const GroupSpec half = GroupSpec::balanced(2);
    CHECK(build_fairness_cost(1.0, 0, half) == vec({1.0, 0.5, -0.5, -0.5, 0.5}));
    CHECK(build_fairness_cost(0.0, 1, half).isZero(0.0));
    CHECK_THROWS_AS(build_fairness_cost(1.0, 2, half), ArgumentError);
    CHECK_THROWS_AS(build_fairness_cost(1.5, 0, half), ArgumentError);
  }

  TEST_CASE("fairness components average to zero over groups") {
    const GroupSpec spec(vec({0.2, 0.3, 0.5}));
    for (double c : {0.3, 1.0, -0.7}) {
      Vector mean = Vector::Zero(7);
      for (int g = 0; g < 3; ++g)
        mean += spec[static_cast<std::size_t>(g)] * build_fairness_cost(c, g, spec);
      CHECK(mean.tail(6).cwiseAbs().maxCoeff() < 1e-15);
    }
  }

  TEST_CASE("group spec validation") {
    CHECK_THROWS_AS(GroupSpec(vec({0.5, 0.6})), ArgumentError);
    CHECK_THROWS_AS(GroupSpec(vec({0.0, 1.0})), ArgumentError);
    CHECK_THROWS_AS(GroupSpec(Vector(0)), ArgumentError);
  }

  TEST_CASE("fairness budget") {
    const BudgetVector b = build_fairness_budget(0.3, 0.1, GroupSpec::balanced(2));
    CHECK(b.values().isApprox(vec({0.3, 0.05, 0.05, 0.05, 0.05})));
    CHECK(build_fairness_budget(0.3, 0.0, GroupSpec::balanced(2))
              .values()
              .tail(4)
              .isZero(0.0));
    const BudgetVector single = build_fairness_budget(0.2, 0.1, GroupSpec::balanced(1));
    CHECK(single.dim() == 3);
    // A single group never shows a disparity.
    CHECK(build_fairness_cost(0.8, 0, GroupSpec::balanced(1)).tail(2).isZero(0.0));
  }

  TEST_CASE("court costs are twice the general construction at gamma = 1/2") {
    const GroupSpec half = GroupSpec::balanced(2);
    for (int g = 0; g < 2; ++g)
      for (std::size_t a : {CourtEnvironment::kRide, CourtEnvironment::kVoucher}) {
        const ContextVector x(vec({0.1, 0.2, 0.3}), g);
        const Vector court = court_cost(x, ActionId(a));
        const Vector general = build_fairness_cost(1.0, g, half);
        const Index first = (a == CourtEnvironment::kRide) ? 2 : 4;
        CHECK(court(first) == doctest::Approx(2.0 * general(1)));
        CHECK(court(first + 1) == doctest::Approx(2.0 * general(3)));
      }
  }

  TEST_CASE("court cost layout") {
    const ContextVector g0(vec({0.5, 0.5, 0.5}), 0);
    const ContextVector g1(vec({0.5, 0.5, 0.5}), 1);
    CHECK(court_cost(g0, ActionId(CourtEnvironment::kControl)).isZero(0.0));
    const Vector ride0 = court_cost(g0, ActionId(CourtEnvironment::kRide));
    CHECK(ride0.head(6) == vec({1.0, 0.0, 1.0, -1.0, 0.0, 0.0}));
    CHECK(ride0.tail(4) == -ride0.segment(2, 4));
    const Vector voucher1 = court_cost(g1, ActionId(CourtEnvironment::kVoucher));
    CHECK(voucher1.head(6) == vec({0.0, 1.0, 0.0, 0.0, -1.0, 1.0}));
    CHECK_THROWS_AS(court_cost(ContextVector(vec({0.5, 0.5, 0.5})), ActionId(0)),
                    ArgumentError);
  }

  TEST_CASE("court rewards") {
    CHECK(court_expected_reward(ContextVector(vec({0.0, 0.3, 0.3}), 1),
                                ActionId(CourtEnvironment::kControl)) == 0.5);
    CHECK(court_expected_reward(ContextVector(vec({0.5, 0.1, 0.5}), 0),
                                ActionId(CourtEnvironment::kRide)) ==
          doctest::Approx(0.8175744762));
    // Voucher helps group 0 twice as much as group 1.
    const double a = 0.4, p = 0.8;
    CHECK(court_expected_reward(ContextVector(vec({a, p, 0.0}), 0),
                                ActionId(CourtEnvironment::kVoucher)) ==
          doctest::Approx(sigmoid(-a + 2.0 * p)));
    CHECK(court_expected_reward(ContextVector(vec({a, p, 0.0}), 1),
                                ActionId(CourtEnvironment::kVoucher)) ==
          doctest::Approx(sigmoid(-a + p)));
  }

  TEST_CASE("court features zero out treatment terms under control") {
    const CourtFeatureMap phi;
    const Vector f = phi.evaluate(ContextVector(vec({0.7, 0.5, 0.5}), 0),
                                  ActionId(CourtEnvironment::kControl));
    CHECK(f(0) == 0.7);
    CHECK(f.tail(4).isZero(0.0));
  }

  TEST_CASE("court Bernoulli rewards match the model by Monte Carlo") {
    const CourtEnvironment env(1e-7);
    const ContextVector x(vec({0.3, 0.6, 0.2}), 0);
    const ActionId a(CourtEnvironment::kVoucher);
    Rng rng(77);
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += env.sample_reward(x, a, rng);
    const double p = env.expected_reward(x, a);
    CHECK(std::abs(s / n - p) <= 4.0 * std::sqrt(p * (1.0 - p) / n));
  }

  TEST_CASE("court contexts and budgets") {
    const CourtEnvironment env(0.025);
    CHECK(env.budgets().values().head(2) == vec({0.05, 0.20}));
    CHECK((env.budgets().values().tail(8).array() == 0.025).all());
    Rng rng(8);
    int g0 = 0;
    for (int i = 0; i < 10000; ++i) {
      const ContextVector x = env.sample_context(rng);
      CHECK(((x.coords.array() >= 0.0) && (x.coords.array() <= 1.0)).all());
      g0 += *x.group == 0 ? 1 : 0;
    }
    CHECK(std::abs(g0 - 5000) < 250);
    CHECK_THROWS_AS(CourtEnvironment(1.5), ArgumentError);
  }
}
