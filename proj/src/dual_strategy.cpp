#include "cbwk/dual_strategy.hpp"

#include "cbwk/diagnostics.hpp"

#include <cmath>
#include <string>

namespace cbwk {

namespace {

void check_horizon_delta(double horizon, double delta) {
  if (!(horizon >= 1.0))
    throw ArgumentError("horizon must be at least 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw ArgumentError("delta must lie in (0,1)");
}

} // namespace

void optimistic_bounds(const ContextVector &x, const Estimator &est,
                       double delta, std::size_t num_actions, Index cost_dim,
                       Vector &ucb, Matrix &lcb) {
  ucb.resize(static_cast<Index>(num_actions));
  lcb.resize(cost_dim, static_cast<Index>(num_actions));
  for (std::size_t a = 0; a < num_actions; ++a) {
    const ActionId id(a);
    ucb(static_cast<Index>(a)) = est.reward_ucb(x, id, delta);
    lcb.col(static_cast<Index>(a)) = est.cost_lcb(x, id, delta);
  }
}

double upsilon(double horizon, double delta, double d, double beta_bound) {
  check_horizon_delta(horizon, delta);
  const double T = horizon;
  const double dq = delta / 4.0;
  const double dev_costs = 2.0 * std::sqrt(d * T * std::log(T * T / dq));
  const double dev_rewards =
      std::sqrt(2.0 * T * std::log(2.0 * (d + 1.0) * T / dq));
  return std::max({beta_bound, dev_costs, dev_rewards});
}

int ilog(double x) {
  if (!(x > 0.0))
    throw ArgumentError("ilog: argument must be positive");
  int k = static_cast<int>(std::ceil(std::log2(x)));
  // Guard against rounding at exact powers of two.
  if (std::ldexp(1.0, k - 1) >= x)
    --k;
  else if (std::ldexp(1.0, k) < x)
    ++k;
  return k;
}

double beta_bar(double horizon, double delta, double c_beta) {
  check_horizon_delta(horizon, delta);
  return c_beta * std::sqrt(horizon) * std::log(4.0 * horizon / delta);
}

double regime_threshold(int k, const AdaptiveConfig &cfg) {
  if (k < 0)
    throw ArgumentError("regime_threshold: negative regime index");
  const double T = static_cast<double>(cfg.horizon);
  const double d = static_cast<double>(cfg.dim);
  const double k2 = static_cast<double>(k) + 2.0;
  if (cfg.threshold_mode == ThresholdMode::practical) {
    if (!(cfg.practical_c > 0.0))
      throw ArgumentError("regime_threshold: practical constant must be positive");
    return cfg.practical_c * d * std::sqrt(T * std::log(T * k2));
  }
  const double delta_k = cfg.delta / (k2 * k2);
  const double beta = beta_bar(T, delta_k, cfg.beta_constant);
  return 4.0 * std::sqrt(T) + 20.0 * std::sqrt(d) * upsilon(T, delta_k, d, beta);
}

double margin_bT(const AdaptiveConfig &cfg) {
  const double T = static_cast<double>(cfg.horizon);
  check_horizon_delta(T, cfg.delta);
  const int K = ilog(T);
  const double d = static_cast<double>(cfg.dim);
  return (1.0 + K) * (regime_threshold(K, cfg) + 2.0 * std::sqrt(d)) / T;
}

Vector adaptive_margin(const AdaptiveConfig &cfg) {
  if (cfg.margin_auto)
    return Vector::Constant(cfg.dim, margin_bT(cfg));
  if (cfg.margin_mask.size() == 0)
    return Vector::Constant(cfg.dim, cfg.margin_b);
  if (cfg.margin_mask.size() != cfg.dim)
    throw ArgumentError("adaptive_margin: mask dimension mismatch");
  return cfg.margin_b * cfg.margin_mask;
}

// --- PgdStrategy ---------------------------------------------------------------

PgdStrategy::PgdStrategy(PgdConfig cfg) : cfg_(std::move(cfg)) {
  if (!(cfg_.gamma > 0.0))
    throw ArgumentError("PgdStrategy: step size must be positive");
  if (cfg_.num_actions == 0)
    throw ArgumentError("PgdStrategy: empty action set");
  check_horizon_delta(static_cast<double>(cfg_.horizon), cfg_.delta);
  const Index d = cfg_.budgets.dim();
  if (cfg_.margin.size() == 0)
    cfg_.margin = Vector::Zero(d);
  if (cfg_.margin.size() != d)
    throw ArgumentError("PgdStrategy: margin dimension mismatch");
  if ((cfg_.margin.array() < 0.0).any())
    throw ArgumentError("PgdStrategy: margin must be nonnegative");
  if ((cfg_.margin.array() > 0.0 &&
       cfg_.margin.array() >= cfg_.budgets.values().array())
          .any())
    diag::warn("PgdStrategy: margin reaches the budget on some component");
  target_ = cfg_.target();
  lambda_ = DualVector(d);
  lcb_dev_sum_ = Vector::Zero(d);
}

ActionId PgdStrategy::select(const ContextVector &x, const Estimator &est,
                             Rng &) {
  Vector ucb;
  Matrix lcb;
  optimistic_bounds(x, est, cfg_.delta, cfg_.num_actions, target_.size(), ucb,
                    lcb);
  return select_action(ucb, lcb, target_, lambda_);
}

void PgdStrategy::observe(const RoundObservation &obs, const Estimator &est) {
  if (obs.warmup)
    return;
  const Vector lcb = est.cost_lcb(*obs.x, obs.a, cfg_.delta);
  lcb_dev_sum_ += lcb - target_;
  lambda_ = dual_update(lambda_, lcb, target_, cfg_.gamma);
}

// --- AdaptivePgdStrategy -------------------------------------------------------

AdaptivePgdStrategy::AdaptivePgdStrategy(AdaptiveConfig cfg,
                                         BudgetVector budgets,
                                         std::size_t num_actions)
    : cfg_(std::move(cfg)), budgets_(std::move(budgets)),
      num_actions_(num_actions) {
  if (num_actions_ == 0)
    throw ArgumentError("AdaptivePgdStrategy: empty action set");
  if (cfg_.dim != budgets_.dim())
    throw ArgumentError("AdaptivePgdStrategy: dimension mismatch");
  check_horizon_delta(static_cast<double>(cfg_.horizon), cfg_.delta);
  const Vector margin = adaptive_margin(cfg_);
  if ((margin.array() >= budgets_.values().array()).any())
    diag::warn("AdaptivePgdStrategy: margin not below the budgets");
  target_ = budgets_.values() - margin;
  max_k_ = ilog(static_cast<double>(cfg_.horizon));
  lambda_ = DualVector(cfg_.dim);
  regime_cost_sum_ = Vector::Zero(cfg_.dim);
  threshold_ = regime_threshold(0, cfg_);
}

double AdaptivePgdStrategy::gamma_k(int k) const {
  return std::ldexp(1.0, k) / std::sqrt(static_cast<double>(cfg_.horizon));
}

double AdaptivePgdStrategy::regime_risk() const {
  const double k2 = static_cast<double>(k_) + 2.0;
  return cfg_.delta / (4.0 * k2 * k2);
}

void AdaptivePgdStrategy::enter_regime(int k, std::size_t start) {
  k_ = k;
  threshold_ = regime_threshold(k_, cfg_);
  lambda_.reset();
  regime_cost_sum_.setZero();
  rounds_in_regime_ = 0;
  starts_.push_back(start);
}

ActionId AdaptivePgdStrategy::select(const ContextVector &x,
                                     const Estimator &est, Rng &) {
  Vector ucb;
  Matrix lcb;
  optimistic_bounds(x, est, regime_risk(), num_actions_, target_.size(), ucb,
                    lcb);
  return select_action(ucb, lcb, target_, lambda_);
}

void AdaptivePgdStrategy::observe(const RoundObservation &obs,
                                  const Estimator &est) {
  if (starts_.empty())
    starts_.push_back(obs.t);
  // Warm-up rounds count towards regime 0 but leave lambda untouched.
  if (!obs.warmup) {
    const Vector lcb = est.cost_lcb(*obs.x, obs.a, regime_risk());
    lambda_ = dual_update(lambda_, lcb, target_, gamma_k(k_));
  }

  // Regime-break test on realized costs since T_k (round t included).
  regime_cost_sum_ += *obs.c - target_;
  ++rounds_in_regime_;
  if (positive_part_norm(regime_cost_sum_) > threshold_) {
    if (k_ >= max_k_) {
      if (cap_hits_++ == 0)
        diag::warn("AdaptivePgdStrategy: regime cap ilog T reached at round " +
                   std::to_string(obs.t) + "; staying in the final regime");
      return;
    }
    enter_regime(k_ + 1, obs.t + 1);
  }
}

} // namespace cbwk
