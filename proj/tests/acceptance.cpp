// Acceptance checks: one PASS/FAIL line per criterion, detail lines indented.
// Exit status is nonzero when any criterion fails.

#include "cbwk/diagnostics.hpp"
#include "cbwk/fairness.hpp"
#include "cbwk/harness.hpp"
#include "cbwk/oracles.hpp"
#include "cbwk/primal_strategy.hpp"
#include "cbwk/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <iostream>
#include <string>
#include <vector>

using namespace cbwk;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char *f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Report {
  bool passed = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string &what) {
    passed = passed && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string &what) { lines.push_back("     " + what); }
};

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs)
    v(i++) = x;
  return v;
}

ExperimentConfig court_config(const std::string &label, StrategySpec s) {
  ExperimentConfig cfg;
  cfg.label = label;
  cfg.env.kind = EnvSpec::Kind::court;
  cfg.env.tau = 1e-7;
  cfg.strategy = std::move(s);
  cfg.estimator.kind = EstimatorSpec::Kind::logistic;
  cfg.estimator.c_delta = 0.025;
  cfg.horizon = 10000;
  cfg.warmup = 50;
  cfg.seeds = 20;
  cfg.margin_convention = MarginConvention::spend;
  cfg.margin_b = 0.005;
  return cfg;
}

StrategySpec pgd_fixed(double gamma) {
  StrategySpec s;
  s.kind = StrategySpec::Kind::pgd_fixed;
  s.gamma = gamma;
  return s;
}

StrategySpec pgd_adaptive() {
  StrategySpec s;
  s.kind = StrategySpec::Kind::pgd_adaptive;
  s.threshold_mode = ThresholdMode::practical;
  s.practical_c = 0.01;
  return s;
}

int count_at_least(const std::vector<int> &v, int k) {
  int n = 0;
  for (int x : v)
    n += x >= k ? 1 : 0;
  return n;
}

// Three contexts, a free baseline action and two costly ones, two budgets.
FiniteInstance synthetic_instance() {
  FiniteInstance inst;
  inst.weights = vec({0.5, 0.3, 0.2});
  inst.reward.resize(3, 3);
  inst.reward << 0.10, 0.60, 0.80,
                 0.20, 0.50, 0.90,
                 0.30, 0.90, 0.70;
  Matrix c0(2, 3), c1(2, 3), c2(2, 3);
  c0 << 0.0, 0.6, 0.5,
        0.0, 0.0, 0.7;
  c1 << 0.0, 0.8, 0.4,
        0.0, 0.0, 0.9;
  c2 << 0.0, 0.5, 0.6,
        0.0, 0.0, 0.5;
  inst.cost = {c0, c1, c2};
  inst.budgets = vec({0.2, 0.15});
  inst.noise = FiniteEnvironment::CostNoise::bernoulli;
  inst.null_action = ActionId(0);
  return inst;
}

ExperimentConfig finite_config(const std::string &label, StrategySpec s,
                               std::size_t T, std::size_t seeds) {
  ExperimentConfig cfg;
  cfg.label = label;
  cfg.env.kind = EnvSpec::Kind::finite;
  cfg.env.instance = synthetic_instance();
  cfg.strategy = std::move(s);
  cfg.estimator.kind = EstimatorSpec::Kind::linear;
  cfg.horizon = T;
  cfg.warmup = 0;
  cfg.seeds = seeds;
  cfg.margin_convention = MarginConvention::all;
  cfg.margin_b = 0.0;
  return cfg;
}

DualSample instance_sample(const FiniteInstance &inst) {
  return DualSample::from_tables(inst.weights, inst.reward, inst.cost,
                                 inst.budgets);
}

// Random instance from the selftest generator; half the time the baseline
// action is made costly, so that feasibility is no longer automatic.
DualSample random_instance(Rng &rng, bool allow_costly_baseline) {
  DualSample s = random_small_instance(rng);
  if (allow_costly_baseline && rng() % 2 == 0) {
    std::uniform_real_distribution<double> u(0.0, 0.4);
    s.cost[0] = Matrix::NullaryExpr(s.size(), s.dim(), [&] { return u(rng); });
  }
  return s;
}

// --- criteria ------------------------------------------------------------------

Report criterion_1() {
  Report rep;
  for (auto [tau, expected] : {std::pair{1e-7, 0.4688}, std::pair{0.025, 0.4731}}) {
    const CourtEnvironment env(tau);
    const auto t0 = Clock::now();
    const OptEstimate est = estimate_opt(env, env.budgets().values(), 10000, 20, 12345);
    const double secs = seconds_since(t0);
    rep.check(std::abs(est.value - expected) <= 0.005 && secs <= 120.0,
              "tau=" + fmt("%g", tau) + ": OPT " + fmt("%.5f", est.value) +
                  " (SE " + fmt("%.5f", est.std_error) + ", target " +
                  fmt("%.4f", expected) + " +- 0.005), " +
                  std::to_string(est.converged_reps) + "/20 certified, " +
                  fmt("%.1f", secs) + " s");
  }
  return rep;
}

Report criterion_2() {
  Report rep;
  {
    const auto t0 = Clock::now();
    const SummaryRow r = run_batch(court_config("PGD 0.01", pgd_fixed(0.01))).summary;
    const double secs = seconds_since(t0);
    rep.check(std::abs(r.reward - 0.4651) <= 0.010 && std::abs(r.ride - 0.0519) <= 0.003 &&
                  secs <= 600.0,
              "gamma=0.01: reward " + fmt("%.4f", r.reward) + " (0.4651 +- 0.010), ride " +
                  fmt("%.4f", r.ride) + " (0.0519 +- 0.003), " + fmt("%.0f", secs) + " s");
  }
  {
    const auto t0 = Clock::now();
    const SummaryRow r = run_batch(court_config("PGD 0.05", pgd_fixed(0.05))).summary;
    const double secs = seconds_since(t0);
    rep.check(std::abs(r.reward - 0.4554) <= 0.010 && r.ride <= 0.050 && secs <= 600.0,
              "gamma=0.05: reward " + fmt("%.4f", r.reward) + " (0.4554 +- 0.010), ride " +
                  fmt("%.4f", r.ride) + " (<= 0.050), " + fmt("%.0f", secs) + " s");
  }
  {
    const auto t0 = Clock::now();
    const SummaryRow r = run_batch(court_config("Adaptive", pgd_adaptive())).summary;
    const double secs = seconds_since(t0);
    const int k2 = count_at_least(r.max_regime, 2);
    rep.check(std::abs(r.reward - 0.4581) <= 0.010 && r.ride <= 0.051 &&
                  2 * k2 > static_cast<int>(r.runs) && secs <= 600.0,
              "adaptive: reward " + fmt("%.4f", r.reward) + " (0.4581 +- 0.010), ride " +
                  fmt("%.4f", r.ride) + " (<= 0.051), k>=2 in " + std::to_string(k2) +
                  "/" + std::to_string(r.runs) + " seeds, " + fmt("%.0f", secs) + " s");
  }
  return rep;
}

Report criterion_3() {
  Report rep;
  Rng rng(2024);
  double worst = 0.0;
  int checked = 0, certified = 0, costly = 0;
  while (checked < 150) {
    const DualSample s = random_instance(rng, true);
    const auto exact = brute_force_opt(s);
    if (!exact)
      continue;
    ++checked;
    costly += s.cost[0].isZero(0.0) ? 0 : 1;
    const DualMinimum m = minimize_dual(s);
    certified += m.converged ? 1 : 0;
    worst = std::max(worst, std::abs(m.value - *exact));
  }
  rep.check(worst <= 1e-4, "max |minimize_dual - LP| = " + fmt("%.3g", worst) +
                               " over " + std::to_string(checked) + " feasible instances (" +
                               std::to_string(costly) + " without a free action, " +
                               std::to_string(certified) + " certified)");
  return rep;
}

Report criterion_4() {
  Report rep;
  Rng rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_general = std::numeric_limits<double>::infinity();
  double worst_cor = std::numeric_limits<double>::infinity();
  int general_n = 0, cor_n = 0;
  while (general_n < 60) {
    const DualSample s = random_instance(rng, true);
    const double b = 0.5 * u(rng) * s.budgets.minCoeff();
    const Vector shifted = s.budgets.array() - b;
    const Vector b_tilde = (0.9 * u(rng)) * shifted;
    DualSample at_shifted = s, at_tilde = s;
    at_shifted.budgets = shifted;
    at_tilde.budgets = b_tilde;
    if (!brute_force_opt(at_shifted) || !brute_force_opt(at_tilde))
      continue;
    const BoundCheck c = lambda_norm_bound_check(s, b, b_tilde);
    worst_general = std::min(worst_general, c.rhs - c.lhs);
    ++general_n;
  }
  while (cor_n < 60) {
    const DualSample s = random_instance(rng, false);
    const double b = 0.5 * u(rng) * s.budgets.minCoeff();
    const BoundCheck c = null_action_bound_check(s, b);
    worst_cor = std::min(worst_cor, c.rhs - c.lhs);
    ++cor_n;
  }
  rep.check(worst_general >= -1e-6, "general bound: min slack " + fmt("%.3g", worst_general) +
                                      " over " + std::to_string(general_n) + " instances");
  rep.check(worst_cor >= -1e-6, "null-action bound: min slack " + fmt("%.3g", worst_cor) +
                                    " over " + std::to_string(cor_n) + " instances");

  // Free baseline with positive reward, other actions cost at least alpha.
  double worst_gap = std::numeric_limits<double>::infinity();
  double worst_cor_alpha = std::numeric_limits<double>::infinity();
  int family = 0;
  for (double alpha : {0.05, 0.1, 0.25, 0.5, 0.9}) {
    for (int i = 0; i < 20; ++i) {
      const Index S = 1 + static_cast<Index>(rng() % 5);
      const Index A = 2 + static_cast<Index>(rng() % 3);
      DualSample s;
      s.weights = Vector::Constant(S, 1.0 / static_cast<double>(S));
      s.reward.resize(S, A);
      s.cost.assign(static_cast<std::size_t>(A), Matrix::Zero(S, 1));
      for (Index x = 0; x < S; ++x) {
        const double base = 0.5 * u(rng);
        s.reward(x, 0) = base;
        for (Index a = 1; a < A; ++a) {
          s.reward(x, a) = base + (1.0 - base) * u(rng);
          s.cost[static_cast<std::size_t>(a)](x, 0) = alpha + (1.0 - alpha) * u(rng);
        }
      }
      const double B = 0.02 + 0.96 * u(rng);
      s.budgets = vec({B});
      DualSample zero = s;
      zero.budgets = vec({0.0});
      const double gap = *brute_force_opt(s) - *brute_force_opt(zero);
      worst_gap = std::min(worst_gap, B / alpha - gap);
      const BoundCheck c = null_action_bound_check(s, 0.25 * B);
      worst_cor_alpha = std::min(worst_cor_alpha, 2.0 / alpha - c.rhs);
      ++family;
    }
  }
  rep.check(worst_gap >= -1e-9, "free-baseline family: min (B/alpha - (OPT(B) - OPT(0))) = " +
                                    fmt("%.3g", worst_gap) + " over " +
                                    std::to_string(family) + " instances");
  rep.check(worst_cor_alpha >= -1e-9,
            "free-baseline family: null-action bound <= 2/alpha, min slack " +
                fmt("%.3g", worst_cor_alpha));
  return rep;
}

Report criterion_5() {
  Report rep;
  {
    ExperimentConfig cfg = court_config("Adaptive x40", pgd_adaptive());
    cfg.seeds = 40;
    const Experiment exp(cfg);
    const BatchResult res = run_batch(cfg);
    const Vector limit = static_cast<double>(cfg.horizon) * exp.target();
    int ok = 0;
    double worst_ride = 0.0, worst_voucher = 0.0;
    for (const Vector &c : res.cum_costs) {
      ok += (c(0) <= limit(0) && c(1) <= limit(1)) ? 1 : 0;
      worst_ride = std::max(worst_ride, c(0) / static_cast<double>(cfg.horizon));
      worst_voucher = std::max(worst_voucher, c(1) / static_cast<double>(cfg.horizon));
    }
    int ok_budget = 0;
    const Vector budget = static_cast<double>(cfg.horizon) * exp.budgets().values();
    for (const Vector &c : res.cum_costs)
      ok_budget += (c(0) <= budget(0) && c(1) <= budget(1)) ? 1 : 0;
    rep.check(ok >= 38, "court adaptive: ride and voucher <= T (B - b) in " +
                            std::to_string(ok) + "/40 seeds (need 38); worst averages ride " +
                            fmt("%.4f", worst_ride) + " vs " + fmt("%.3f", exp.target()(0)) +
                            ", voucher " + fmt("%.4f", worst_voucher) + " vs " +
                            fmt("%.3f", exp.target()(1)));
    rep.note("for reference: <= T B (no margin) in " + std::to_string(ok_budget) + "/40 seeds");
  }
  {
    StrategySpec s;
    s.kind = StrategySpec::Kind::pgd_adaptive;
    s.threshold_mode = ThresholdMode::theoretical;
    s.margin_auto = true;
    ExperimentConfig cfg = finite_config("theoretical", s, 5000, 20);
    cfg.warmup = 20;
    const Experiment exp(cfg);
    const BatchResult res = run_batch(cfg);
    int ok = 0;
    for (const Vector &c : res.cum_costs)
      ok += ((c - static_cast<double>(cfg.horizon) * exp.budgets().values()).array() <= 1e-9)
                    .all()
                ? 1
                : 0;
    rep.check(20 * ok >= 19 * static_cast<int>(res.cum_costs.size()),
              "synthetic, theoretical thresholds, auto b_T: sum c <= T B in " +
                  std::to_string(ok) + "/" + std::to_string(res.cum_costs.size()) +
                  " seeds");
    rep.note("b_T = " + fmt("%.3g", exp.margin()(0)) + " against min B = " +
             fmt("%.3g", exp.budgets().min()) + "; average reward " +
             fmt("%.4f", res.summary.reward));
  }
  return rep;
}

// beta_T replayed from a trajectory: sum of eps_{t-1}(x_t, a_t, delta) at the
// primal strategy's confidence level.
double replay_beta(const Experiment &exp, const Trajectory &traj, double delta) {
  auto est = exp.make_estimator();
  BetaAccumulator beta;
  for (const RoundRecord &rec : traj.records()) {
    beta.add(est->epsilon(rec.x, rec.a, delta));
    est->update(rec.x, rec.a, rec.r, rec.c);
  }
  return beta.value();
}

Report criterion_6() {
  Report rep;
  const FiniteInstance inst = synthetic_instance();
  constexpr std::size_t T = 5000, seeds = 50;

  StrategySpec soft;
  soft.kind = StrategySpec::Kind::primal;
  soft.slack = SlackMode::soft;
  {
    const ExperimentConfig cfg = finite_config("soft", soft, T, seeds);
    const Experiment exp(cfg);
    PrimalConfig pc;
    pc.delta = cfg.delta;
    pc.horizon = T;
    pc.budgets = BudgetVector(inst.budgets);
    const SlackSchedule sched(pc, inst.weights.size());
    int ok = 0;
    double worst_avg = 0.0;
    for (std::size_t i = 0; i < seeds; ++i) {
      const Trajectory traj = run_single(exp, cfg.base_seed + i);
      const double beta = replay_beta(exp, traj, cfg.delta / 4.0);
      const Vector bound = static_cast<double>(T) * inst.budgets.array() +
                           2.0 * sched.alpha() + beta + 2.0 * sched.xi_total();
      ok += ((traj.cum_cost() - bound).array() <= 0.0).all() ? 1 : 0;
      worst_avg = std::max(
          worst_avg,
          ((traj.cum_cost() / static_cast<double>(T)) - inst.budgets).maxCoeff());
    }
    rep.check(ok * 20 >= 19 * static_cast<int>(seeds),
              "soft schedule: sum c <= T B + 2 alpha + beta + 2 Xi in " + std::to_string(ok) +
                  "/50 seeds");
    rep.note("alpha = " + fmt("%.1f", sched.alpha()) + ", Xi = " + fmt("%.1f", sched.xi_total()) +
             "; largest average overspend " + fmt("%.4f", worst_avg));
  }
  {
    StrategySpec hard = soft;
    hard.slack = SlackMode::hard_null;
    const ExperimentConfig cfg = finite_config("hard_null", hard, T, seeds);
    const BatchResult res = run_batch(cfg);
    int ok = 0;
    for (const Vector &c : res.cum_costs)
      ok += ((c - static_cast<double>(T) * inst.budgets).array() <= 0.0).all() ? 1 : 0;
    rep.check(ok * 20 >= 19 * static_cast<int>(seeds),
              "hard-null schedule: sum c <= T B in " + std::to_string(ok) + "/50 seeds");
    rep.note("average reward " + fmt("%.4f", res.summary.reward) + ", average costs " +
             fmt("%.4f", res.summary.cost(0)) + " / " + fmt("%.4f", res.summary.cost(1)));
  }
  {
    StrategySpec exact = soft;
    exact.exact_nu = true;
    ExperimentConfig cfg = finite_config("exact", exact, 20000, 10);
    cfg.estimator.kind = EstimatorSpec::Kind::oracle;
    const BatchResult res = run_batch(cfg);
    const double opt = *brute_force_opt(instance_sample(inst));
    rep.check(std::abs(res.summary.reward - opt) <= 0.01,
              "oracle estimates, exact nu, T=20000: average reward " +
                  fmt("%.4f", res.summary.reward) + " (2SE " +
                  fmt("%.4f", res.summary.reward_2se) + ") vs OPT " + fmt("%.4f", opt));
  }
  return rep;
}

Report criterion_7() {
  Report rep;
  {
    // Fixed protocol: seed 1, reported as is.
    const CourtEnvironment env(1e-7);
    const CourtFeatureMap phi;
    auto recover = [&](std::uint64_t seed) {
      Rng rng(seed);
      std::uniform_int_distribution<std::size_t> act(0, 2);
      const Index n = 50000;
      Matrix X(n, 5);
      Vector y(n);
      for (Index i = 0; i < n; ++i) {
        const ContextVector x = env.sample_context(rng);
        const ActionId a(act(rng));
        X.row(i) = phi.evaluate(x, a).transpose();
        y(i) = env.sample_reward(x, a, rng);
      }
      return (fit_logistic_mle(X, y, 0.0).mu - CourtEnvironment::true_parameters()).norm();
    };
    const double err = recover(1);
    int within = 0;
    for (std::uint64_t s = 101; s < 121; ++s)
      within += recover(s) <= 0.1 ? 1 : 0;
    rep.check(err <= 0.1, "MLE from 50000 uniform-action samples (seed 1): |mu - mu*| = " +
                              fmt("%.4f", err));
    rep.note("replicates 101..120: " + std::to_string(within) +
             "/20 within 0.1; asymptotic rms error at this sample size is about 0.12");
  }

  ExperimentConfig cfg = court_config("oracle", pgd_fixed(0.01));
  cfg.estimator.kind = EstimatorSpec::Kind::oracle;
  cfg.seeds = 1;
  const Experiment exp(cfg);
  const Trajectory traj = run_single(exp, 1);
  {
    auto est = exp.make_estimator();
    BetaAccumulator beta;
    double worst = 0.0;
    for (const RoundRecord &rec : traj.records()) {
      for (std::size_t a = 0; a < 3; ++a)
        worst = std::max(worst, est->epsilon(rec.x, ActionId(a), cfg.delta));
      beta.add(est->epsilon(rec.x, rec.a, cfg.delta));
      est->update(rec.x, rec.a, rec.r, rec.c);
    }
    rep.check(worst == 0.0 && beta.value() == 0.0,
              "oracle estimator: max eps " + fmt("%g", worst) + ", beta_T " +
                  fmt("%g", beta.value()) + " over " + std::to_string(traj.size()) + " rounds");
  }
  {
    // lambda_{t+1} = (lambda_t + gamma g_t)_+ >= lambda_t + gamma g_t, so the
    // positive part of sum g is dominated componentwise by lambda / gamma.
    const auto &recs = traj.records();
    const Vector target = exp.target();
    const auto oracle_ptr = exp.make_estimator();
    const Estimator &oracle = *oracle_ptr;
    Vector sum = Vector::Zero(target.size());
    std::size_t violations = 0, checked = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
      if (recs[i].warmup)
        continue;
      sum += oracle.cost_lcb(recs[i].x, recs[i].a, cfg.delta) - target;
      const Vector &lam = recs[i + 1].lambda_before.values();
      const double lhs = sum.cwiseMax(0.0).norm();
      const double rhs = lam.norm() / cfg.strategy.gamma;
      worst = std::max(worst, lhs - rhs);
      violations += lhs <= rhs * (1.0 + 1e-12) + 1e-9 ? 0 : 1;
      ++checked;
    }
    rep.check(violations == 0, "telescoping |(sum (lcb - target))_+| <= |lambda_t| / gamma: " +
                                   std::to_string(violations) + " violations in " +
                                   std::to_string(checked) + " rounds (max lhs - rhs " +
                                   fmt("%.3g", worst) + ")");
  }
  return rep;
}

Report criterion_8() {
  Report rep;
  const auto t0 = Clock::now();
  const auto results = run_selftest();
  const double secs = seconds_since(t0);
  std::size_t passed = 0;
  for (const SelftestResult &r : results) {
    passed += r.passed ? 1 : 0;
    if (!r.passed)
      rep.note(r.name + ": " + r.detail);
  }
  rep.check(passed == results.size() && secs <= 60.0,
            "selftest " + std::to_string(passed) + "/" + std::to_string(results.size()) +
                " in " + fmt("%.1f", secs) + " s");
  return rep;
}

} // namespace

int main(int argc, char **argv) {
  // Optional list of criterion numbers to run.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i)
    only.push_back(std::stoi(argv[i]));
  diag::set_muted(true);

  const std::vector<std::pair<std::string, std::function<Report()>>> criteria = {
      {"1 OPT oracle reproduction", criterion_1},
      {"2 strategy rows at N=20", criterion_2},
      {"3 strong-duality oracle equivalence", criterion_3},
      {"4 lambda-norm bounds", criterion_4},
      {"5 hard-constraint satisfaction", criterion_5},
      {"6 primal strategy", criterion_6},
      {"7 estimation", criterion_7},
      {"8 property suite", criterion_8},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), static_cast<int>(i + 1)) == only.end())
      continue;
    const auto t0 = Clock::now();
    Report rep;
    try {
      rep = criteria[i].second();
    } catch (const std::exception &e) {
      rep.check(false, std::string("exception: ") + e.what());
    }
    all = all && rep.passed;
    std::cout << (rep.passed ? "PASS " : "FAIL ") << "criterion " << criteria[i].first
              << " (" << fmt("%.1f", seconds_since(t0)) << " s)\n";
    for (const std::string &l : rep.lines)
      std::cout << "    " << l << '\n';
    std::cout.flush();
  }
  return all ? 0 : 1;
}
