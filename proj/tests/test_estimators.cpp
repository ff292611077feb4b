#include "cbwk/estimators.hpp"
#include "cbwk/fairness.hpp"
#include "cbwk/finite_env.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace cbwk;
using cbwk::testing::FixedEstimator;
using cbwk::testing::vec;

namespace {

ContextVector court_ctx(double age, double prox, double pov, int group) {
  return ContextVector(vec({age, prox, pov}), group);
}

// Uniform-action court samples: features and Bernoulli labels.
void court_samples(std::size_t n, std::uint64_t seed, Matrix &X, Vector &y) {
  const CourtEnvironment env(1e-7);
  const CourtFeatureMap phi;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> act(0, 2);
  X.resize(static_cast<Index>(n), 5);
  y.resize(static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const ContextVector x = env.sample_context(rng);
    const ActionId a(act(rng));
    X.row(static_cast<Index>(i)) = phi.evaluate(x, a).transpose();
    y(static_cast<Index>(i)) = env.sample_reward(x, a, rng);
  }
}

} // namespace

TEST_SUITE("estimators") {
  TEST_CASE("clipped bounds saturate") {
    const ContextVector x(vec({0.0}));
    FixedEstimator hi(0.9, vec({-0.95}), 0.3);
    CHECK(hi.reward_ucb(x, ActionId(0), 0.05) == 1.0);
    FixedEstimator lo(0.2, vec({-0.95}), 0.2);
    CHECK(lo.cost_lcb(x, ActionId(0), 0.05) == vec({-1.0}));
    CHECK(lo.reward_ucb(x, ActionId(0), 0.05) == doctest::Approx(0.4));
  }

  TEST_CASE("oracle estimator is exact with zero width") {
    const CourtEnvironment env(0.025);
    OracleEstimator est(env);
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
      const ContextVector x = env.sample_context(rng);
      for (std::size_t a = 0; a < 3; ++a) {
        const ActionId id(a);
        CHECK(est.epsilon(x, id, 0.01) == 0.0);
        CHECK(est.reward_ucb(x, id, 0.01) == env.expected_reward(x, id));
        CHECK(est.cost_lcb(x, id, 0.01) == env.expected_cost(x, id));
      }
      est.update(x, ActionId(0), 1.0, Vector::Zero(10));
    }
    CHECK(est.rounds() == 200);
  }

  TEST_CASE("no data means maximal optimism") {
    auto phi = std::make_shared<TabularFeatureMap>(2, 2);
    LinearUcbEstimator lin(phi, 3);
    const ContextVector x = FiniteEnvironment::context(1);
    CHECK(lin.reward_ucb(x, ActionId(1), 0.05) == 1.0);
    CHECK(lin.cost_lcb(x, ActionId(1), 0.05) == Vector::Constant(3, -1.0));
    LogisticUcbEstimator logit(std::make_shared<CourtFeatureMap>(), court_cost);
    const ContextVector c = court_ctx(0.3, 0.4, 0.5, 0);
    CHECK(logit.reward_ucb(c, ActionId(2), 0.05) == 1.0);
    CHECK(logit.reward_estimate(c, ActionId(2)) == 0.5);
  }

  TEST_CASE("linear estimator: Sherman-Morrison matches a direct inverse") {
    auto phi = std::make_shared<FunctionFeatureMap>(
        4, [](const ContextVector &x, ActionId a) {
          Vector f(4);
          f << 1.0, x.coords(0), x.coords(0) * static_cast<double>(a.index),
              static_cast<double>(a.index);
          return f;
        });
    LinearUcbEstimator est(phi, 2, {1.0, 1.0, 0});
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 3000; ++t) {
      const ContextVector x(vec({u(rng)}));
      est.update(x, ActionId(rng() % 3), u(rng) < 0.5 ? 0.0 : 1.0,
                 vec({u(rng), -u(rng)}));
    }
    CHECK(est.inverse_drift() < 1e-9);
    const ContextVector x(vec({0.4}));
    const Vector f = phi->evaluate(x, ActionId(1));
    const Matrix direct = est.design().inverse();
    CHECK(est.reward_epsilon(x, ActionId(1), 0.05) ==
          doctest::Approx(std::sqrt(f.dot(direct * f))));
  }

  TEST_CASE("linear estimator recovers tabular means") {
    const Vector w = vec({0.5, 0.5});
    Matrix R(2, 2);
    R << 0.2, 0.7, 0.9, 0.4;
    Matrix c0(1, 2), c1(1, 2);
    c0 << 0.1, 0.6;
    c1 << 0.3, 0.8;
    const FiniteEnvironment env(w, R, {c0, c1},
                                FiniteEnvironment::CostNoise::bernoulli);
    LinearUcbEstimator est(std::make_shared<TabularFeatureMap>(2, 2), 1);
    Rng rng(9);
    for (int t = 0; t < 40000; ++t) {
      const ContextVector x = env.sample_context(rng);
      const ActionId a(rng() % 2);
      const double r = env.sample_reward(x, a, rng);
      est.update(x, a, r, env.sample_cost(x, a, rng));
    }
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t a = 0; a < 2; ++a) {
        const ContextVector x = FiniteEnvironment::context(i);
        CHECK(est.reward_estimate(x, ActionId(a)) ==
              doctest::Approx(R(static_cast<Index>(i), static_cast<Index>(a)))
                  .epsilon(0.03));
      }
    // Width shrinks like 1 / sqrt(n) per cell: n ~ 10000.
    CHECK(est.reward_epsilon(FiniteEnvironment::context(0), ActionId(0), 0.05) <
          0.011);
  }

  TEST_CASE("sigmoid conventions") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(1.5) == doctest::Approx(0.8175744762));
    CHECK(sigmoid(1.5, SigmoidConvention::negated) ==
          doctest::Approx(1.0 - 0.8175744762));
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
  }

  TEST_CASE("logistic MLE recovers the court parameters") {
    Matrix X;
    Vector y;
    court_samples(50000, 21, X, y);
    const LogisticFit fit = fit_logistic_mle(X, y, 0.0);
    CHECK(fit.converged);
    CHECK_FALSE(fit.floored);
    // Asymptotic per-coordinate sd at n = 50000 is at most 0.08; the norm of
    // the error has rms 0.12.
    const Vector err = fit.mu - CourtEnvironment::true_parameters();
    CHECK(err.cwiseAbs().maxCoeff() <= 0.32);
    CHECK(err.norm() <= 0.3);
  }

  TEST_CASE("logistic MLE falls back to the floor ridge under separation") {
    Matrix X(4, 1);
    X << -2.0, -1.0, 1.0, 2.0;
    const Vector y = vec({0.0, 0.0, 1.0, 1.0});
    const LogisticFit fit = fit_logistic_mle(X, y, 0.0);
    CHECK(fit.floored);
    CHECK(std::isfinite(fit.mu(0)));
    CHECK(fit.mu(0) > 0.0);
    CHECK_THROWS_AS(fit_logistic_mle(X, vec({0.0, 0.5, 1.0, 1.0}), 0.0),
                    ArgumentError);
  }

  TEST_CASE("logistic width formula") {
    const Vector phi = vec({1.0, 2.0});
    Matrix vinv(2, 2);
    vinv << 0.5, 0.0, 0.0, 0.25;
    // sqrt(0.5 + 1.0) * 0.1 * (1 + ln 10)
    CHECK(logistic_width(0.1, 10, phi, vinv) ==
          doctest::Approx(0.1 * (1.0 + std::log(10.0)) * std::sqrt(1.5)));
    CHECK(logistic_width(0.1, 0, phi, vinv) ==
          doctest::Approx(0.1 * std::sqrt(1.5)));
  }

  TEST_CASE("logistic estimator width shrinks with data") {
    const CourtEnvironment env(1e-7);
    LogisticUcbEstimator est(std::make_shared<CourtFeatureMap>(), court_cost);
    Rng rng(4);
    const ContextVector probe = court_ctx(0.5, 0.5, 0.5, 0);
    double prev = 1e9;
    for (int block = 0; block < 4; ++block) {
      for (int t = 0; t < 1000; ++t) {
        const ContextVector x = env.sample_context(rng);
        const ActionId a(rng() % 3);
        const double r = env.sample_reward(x, a, rng);
        est.update(x, a, r, env.expected_cost(x, a));
      }
      const double w = est.reward_epsilon(probe, ActionId(2), 0.05);
      CHECK(w < prev);
      prev = w;
    }
    CHECK(est.cost_epsilon(probe, ActionId(2), 0.05) == 0.0);
    CHECK(est.cost_lcb(probe, ActionId(2), 0.05) ==
          court_cost(probe, ActionId(2)));
    // 500 refits, then one every 10 rounds.
    CHECK(est.refits() == 500 + 350);
  }

  TEST_CASE("beta accumulator") {
    BetaAccumulator b;
    b.add(0.5);
    b.add(0.25);
    CHECK(b.value() == 0.75);
    CHECK(b.count() == 2);
    CHECK_THROWS_AS(b.add(-1e-3), ArgumentError);
  }
}
