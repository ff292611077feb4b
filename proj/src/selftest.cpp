#include "cbwk/selftest.hpp"

#include "cbwk/diagnostics.hpp"
#include "cbwk/fairness.hpp"

#include "cbwk_golden.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace cbwk {

namespace {

Vector uniform_vector(Index n, double lo, double hi, Rng &rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Index i = 0; i < n; ++i)
    v(i) = u(rng);
  return v;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

SelftestResult dual_nonnegativity() {
  Rng rng(101);
  std::uniform_real_distribution<double> step(1e-3, 1.0);
  for (int seq = 0; seq < 200; ++seq) {
    const Index d = 1 + static_cast<Index>(rng() % 6);
    DualVector lam(d);
    const Vector target = uniform_vector(d, 0.0, 1.0, rng);
    for (int k = 0; k < 50; ++k) {
      lam = dual_update(lam, uniform_vector(d, -1.0, 1.0, rng), target, step(rng));
      if ((lam.values().array() < 0.0).any())
        return {"dual_nonnegativity", false, "negative component after update"};
    }
  }
  return {"dual_nonnegativity", true, "10000 updates"};
}

SelftestResult projection_lipschitz() {
  Rng rng(102);
  std::uniform_real_distribution<double> step(1e-3, 2.0);
  double worst = -1e300;
  for (int i = 0; i < 1000; ++i) {
    const Index d = 1 + static_cast<Index>(rng() % 6);
    const DualVector a(uniform_vector(d, 0.0, 3.0, rng));
    const DualVector b(uniform_vector(d, 0.0, 3.0, rng));
    const Vector lcb = uniform_vector(d, -1.0, 1.0, rng);
    const Vector target = uniform_vector(d, 0.0, 1.0, rng);
    const double g = step(rng);
    const double lhs =
        (dual_update(a, lcb, target, g).values() - dual_update(b, lcb, target, g).values())
            .norm();
    worst = std::max(worst, lhs - (a.values() - b.values()).norm());
  }
  return {"projection_lipschitz", worst <= 1e-12,
          "max excess " + fmt(worst) + " over 1000 pairs"};
}

SelftestResult clipping_ranges() {
  Rng rng(103);
  auto phi = std::make_shared<TabularFeatureMap>(3, 3);
  LinearUcbEstimator est(phi, 2, {0.5, 1.0, 1000});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const ContextVector x = FiniteEnvironment::context(rng() % 3);
    const ActionId a(rng() % 3);
    for (std::size_t b = 0; b < 3; ++b) {
      const ActionId id(b);
      const double ucb = est.reward_ucb(x, id, 0.05);
      const Vector lcb = est.cost_lcb(x, id, 0.05);
      if (ucb < 0.0 || ucb > 1.0 || (lcb.array().abs() > 1.0).any())
        return {"clipping_ranges", false, "bound outside its range"};
    }
    Vector c(2);
    c << 2.0 * u(rng) - 1.0, (u(rng) < 0.5 ? 1.0 : -1.0);
    est.update(x, a, u(rng) < 0.7 ? 1.0 : 0.0, c);
  }
  const bool scalar = clip(1.3, 0.0, 1.0) == 1.0 && clip(-1.15, -1.0, 1.0) == -1.0 &&
                      clip(0.25, 0.0, 1.0) == 0.25;
  return {"clipping_ranges", scalar, "ucb in [0,1], lcb in [-1,1]^d over 300 rounds"};
}

// Finite instance with one costly, rewarding action: a tiny practical
// threshold forces a regime break whenever realized costs exceed the target.
ExperimentConfig regime_config(double c, std::size_t horizon) {
  FiniteInstance inst;
  inst.weights = Vector::Ones(1);
  inst.reward.resize(1, 2);
  inst.reward << 0.1, 0.9;
  Matrix cost(1, 2);
  cost << 0.0, 1.0;
  inst.cost = {cost};
  inst.budgets = Vector::Constant(1, 0.2);
  inst.null_action = ActionId(0);

  ExperimentConfig cfg;
  cfg.env.kind = EnvSpec::Kind::finite;
  cfg.env.instance = inst;
  cfg.strategy.kind = StrategySpec::Kind::pgd_adaptive;
  cfg.strategy.practical_c = c;
  cfg.estimator.kind = EstimatorSpec::Kind::oracle;
  cfg.horizon = horizon;
  cfg.warmup = 0;
  cfg.seeds = 1;
  cfg.margin_convention = MarginConvention::all;
  cfg.margin_b = 0.01;
  return cfg;
}

SelftestResult gamma_doubling() {
  const ExperimentConfig cfg = regime_config(0.02, 4096);
  const Experiment exp(cfg);
  const Trajectory traj = run_single(exp, 5);
  const double g0 = 1.0 / std::sqrt(4096.0);
  int breaks = 0;
  const auto &recs = traj.records();
  for (std::size_t i = 1; i < recs.size(); ++i) {
    if (recs[i].regime == recs[i - 1].regime)
      continue;
    ++breaks;
    if (recs[i].regime != recs[i - 1].regime + 1)
      return {"gamma_doubling", false, "regime index skipped"};
    if (!recs[i].lambda_before.values().isZero(0.0))
      return {"gamma_doubling", false, "lambda not reset at a regime start"};
  }
  AdaptiveConfig ac;
  ac.horizon = 4096;
  AdaptivePgdStrategy probe(ac, BudgetVector(Vector::Constant(1, 0.2)), 2);
  for (int k = 0; k < 12; ++k)
    if (probe.gamma_k(k + 1) != 2.0 * probe.gamma_k(k) ||
        probe.gamma_k(k) != std::ldexp(g0, k))
      return {"gamma_doubling", false, "gamma_{k+1} != 2 gamma_k"};
  return {"gamma_doubling", breaks >= 1,
          std::to_string(breaks) + " regime changes, lambda reset at each"};
}

SelftestResult regime_cap() {
  const std::size_t T = 1000;
  const ExperimentConfig cfg = regime_config(1e-9, T);
  const Experiment exp(cfg);
  const bool was_muted = diag::muted();
  diag::set_muted(true);
  const Trajectory traj = run_single(exp, 6);
  diag::set_muted(was_muted);
  int max_regime = 0;
  for (const RoundRecord &rec : traj.records())
    max_regime = std::max(max_regime, rec.regime);
  const int cap = ilog(static_cast<double>(T));
  return {"regime_cap", max_regime == cap,
          std::to_string(max_regime + 1) + " regimes, cap ilog T + 1 = " +
              std::to_string(cap + 1)};
}

SelftestResult fairness_antisymmetry() {
  Rng rng(107);
  const CourtEnvironment env(1e-7);
  for (int i = 0; i < 2000; ++i) {
    const ContextVector x = env.sample_context(rng);
    for (std::size_t a = 0; a < 3; ++a) {
      const Vector c = court_cost(x, ActionId(a));
      if (c.segment(6, 4) != -c.segment(2, 4))
        return {"fairness_antisymmetry", false, "court series not negated"};
    }
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const std::size_t G = 1 + rng() % 4;
    Vector gamma = uniform_vector(static_cast<Index>(G), 0.1, 1.0, rng);
    gamma /= gamma.sum();
    const GroupSpec spec(gamma);
    const Vector c = build_fairness_cost(u(rng), static_cast<int>(rng() % G), spec);
    for (Index g = 0; g < static_cast<Index>(G); ++g)
      if (c(1 + 2 * g) + c(2 + 2 * g) != 0.0)
        return {"fairness_antisymmetry", false, "group pair does not sum to 0"};
  }
  return {"fairness_antisymmetry", true, "court and general constructions"};
}

SelftestResult subgradient_inequality() {
  Rng rng(108);
  double worst = 1e300;
  for (int i = 0; i < 100; ++i) {
    const DualSample s = random_small_instance(rng);
    const Vector a = uniform_vector(s.dim(), 0.0, 3.0, rng);
    const Vector b = uniform_vector(s.dim(), 0.0, 3.0, rng);
    Vector g;
    const double ga = dual_objective(a, s, &g);
    worst = std::min(worst, dual_objective(b, s) - ga - g.dot(b - a));
  }
  return {"subgradient_inequality", worst >= -1e-9,
          "min slack " + fmt(worst) + " over 100 pairs"};
}

SelftestResult oracle_equivalence() {
  Rng rng(109);
  double worst = 0.0;
  int checked = 0;
  while (checked < 100) {
    const DualSample s = random_small_instance(rng);
    const auto exact = brute_force_opt(s);
    if (!exact)
      continue;
    ++checked;
    worst = std::max(worst, std::abs(minimize_dual(s).value - *exact));
  }
  return {"oracle_equivalence", worst <= 1e-4,
          "max |dual - LP| " + fmt(worst) + " over 100 instances"};
}

SelftestResult csv_golden() {
  const BatchResult res = run_batch(golden_toy_config());
  std::ostringstream out;
  emit_csv(res.series, out);
  const bool same = out.str() == golden_toy_csv();
  return {"csv_golden", same,
          same ? "10-round toy run matches" : "output differs from golden file"};
}

} // namespace

DualSample random_small_instance(Rng &rng) {
  const Index S = 1 + static_cast<Index>(rng() % 5);
  const Index A = 2 + static_cast<Index>(rng() % 3);
  const Index d = 1 + static_cast<Index>(rng() % 3);
  Vector w = uniform_vector(S, 0.05, 1.0, rng);
  w /= w.sum();
  Matrix R(S, A);
  for (Index x = 0; x < S; ++x)
    R.row(x) = uniform_vector(A, 0.0, 1.0, rng).transpose();
  std::vector<Matrix> C(static_cast<std::size_t>(S), Matrix(d, A));
  for (Matrix &c : C) {
    for (Index a = 0; a < A; ++a)
      c.col(a) = uniform_vector(d, 0.0, 1.0, rng);
    c.col(0).setZero();
  }
  return DualSample::from_tables(w, R, C, uniform_vector(d, 0.05, 0.55, rng));
}

ExperimentConfig golden_toy_config() {
  FiniteInstance inst;
  inst.weights = Vector::Constant(2, 0.5);
  inst.reward.resize(2, 2);
  inst.reward << 0.2, 0.8, 0.5, 0.6;
  Matrix c0(1, 2), c1(1, 2);
  c0 << 0.0, 1.0;
  c1 << 0.0, 0.5;
  inst.cost = {c0, c1};
  inst.budgets = Vector::Constant(1, 0.3);
  inst.null_action = ActionId(0);

  ExperimentConfig cfg;
  cfg.label = "golden toy";
  cfg.env.kind = EnvSpec::Kind::finite;
  cfg.env.instance = inst;
  cfg.strategy.kind = StrategySpec::Kind::pgd_fixed;
  cfg.strategy.gamma = 0.1;
  cfg.estimator.kind = EstimatorSpec::Kind::oracle;
  cfg.horizon = 10;
  cfg.warmup = 2;
  cfg.seeds = 3;
  cfg.base_seed = 7;
  cfg.margin_convention = MarginConvention::all;
  cfg.margin_b = 0.05;
  cfg.include_warmup = true;
  cfg.threads = 1;
  return cfg;
}

const std::string &golden_toy_csv() {
  static const std::string text = kGoldenToyCsv;
  return text;
}

std::vector<SelftestResult> run_selftest() {
  const std::vector<std::pair<const char *, std::function<SelftestResult()>>>
      checks = {{"dual_nonnegativity", dual_nonnegativity},
                {"projection_lipschitz", projection_lipschitz},
                {"clipping_ranges", clipping_ranges},
                {"gamma_doubling", gamma_doubling},
                {"regime_cap", regime_cap},
                {"fairness_antisymmetry", fairness_antisymmetry},
                {"subgradient_inequality", subgradient_inequality},
                {"oracle_equivalence", oracle_equivalence},
                {"csv_golden", csv_golden}};
  std::vector<SelftestResult> out;
  for (const auto &[name, check] : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception &e) {
      out.push_back({name, false, std::string("exception: ") + e.what()});
    }
  }
  return out;
}

} // namespace cbwk
