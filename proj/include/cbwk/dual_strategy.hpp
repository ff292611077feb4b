#pragma once

#include "cbwk/strategy.hpp"

#include <vector>

namespace cbwk {

/// argmax_a { ucb(a) - <lcb(:, a) - target, lambda> }, ties to the lowest
/// index. `ucb` has one entry per action, `lcb` is d x |A|.
template <typename DerivedU, typename DerivedL, typename DerivedT>
ActionId select_action(const Eigen::MatrixBase<DerivedU> &ucb,
                       const Eigen::MatrixBase<DerivedL> &lcb,
                       const Eigen::MatrixBase<DerivedT> &target,
                       const DualVector &lambda) {
  using Scalar = typename DerivedU::Scalar;
  if (ucb.size() == 0)
    throw ArgumentError("select_action: empty action set");
  if (lcb.cols() != ucb.size() || lcb.rows() != lambda.dim() ||
      target.size() != lambda.dim())
    throw ArgumentError("select_action: dimension mismatch");
  const VectorX<Scalar> lam = lambda.values().template cast<Scalar>();
  const Scalar offset = target.dot(lam);
  Index best = 0;
  Scalar best_score = ucb(0) - lcb.col(0).dot(lam) + offset;
  for (Index a = 1; a < ucb.size(); ++a) {
    const Scalar s = ucb(a) - lcb.col(a).dot(lam) + offset;
    if (s > best_score) {
      best_score = s;
      best = a;
    }
  }
  return ActionId(static_cast<std::size_t>(best));
}

/// (lambda + gamma (lcb - target))_+
template <typename DerivedL, typename DerivedT>
DualVector dual_update(const DualVector &lambda,
                       const Eigen::MatrixBase<DerivedL> &lcb_played,
                       const Eigen::MatrixBase<DerivedT> &target, double gamma) {
  if (!(gamma > 0.0))
    throw ArgumentError("dual_update: step size must be positive");
  return DualVector::projected(lambda.values() +
                               gamma * (lcb_played - target));
}

/// Reward UCBs (length |A|) and cost LCBs (d x |A|) at context x.
void optimistic_bounds(const ContextVector &x, const Estimator &est,
                       double delta, std::size_t num_actions, Index cost_dim,
                       Vector &ucb, Matrix &lcb);

/// Max of the estimation-error term `beta_bound` and the two martingale
/// deviation terms, at confidence delta.
double upsilon(double horizon, double delta, double d, double beta_bound);

/// ceil(log2 x)
int ilog(double x);

/// Theoretical stand-in for beta_{T, delta/4}: C_beta sqrt(T) ln(4T / delta).
double beta_bar(double horizon, double delta, double c_beta);

enum class ThresholdMode { theoretical, practical };

struct AdaptiveConfig {
  double delta = 0.05;
  std::size_t horizon = 10000;
  Index dim = 1;
  ThresholdMode threshold_mode = ThresholdMode::practical;
  double practical_c = 0.01;
  double beta_constant = 1.0;
  /// When true the margin is b_T on every component; otherwise
  /// `margin_b * margin_mask` (mask defaults to all ones).
  bool margin_auto = false;
  double margin_b = 0.0;
  Vector margin_mask;
};

/// M_{T,delta,k}: 4 sqrt(T) + 20 sqrt(d) Upsilon_{T, delta/(k+2)^2} in
/// theoretical mode, c d sqrt(T ln(T (k+2))) in practical mode.
double regime_threshold(int k, const AdaptiveConfig &cfg);

/// b_T = (1 + ilog T) (M_{T,delta,ilog T} + 2 sqrt d) / T
double margin_bT(const AdaptiveConfig &cfg);

/// Margin vector the adaptive strategy subtracts from B.
Vector adaptive_margin(const AdaptiveConfig &cfg);

struct PgdConfig {
  std::size_t num_actions = 0;
  double gamma = 0.01;
  double delta = 0.05;
  std::size_t horizon = 10000;
  BudgetVector budgets;
  /// Subtracted from the budgets: b 1, or b on selected components.
  Vector margin;

  Vector target() const { return budgets.values() - margin; }
};

/// Projected gradient descent on the dual variables with a fixed step size.
class PgdStrategy final : public Strategy {
public:
  explicit PgdStrategy(PgdConfig cfg);

  ActionId select(const ContextVector &x, const Estimator &est,
                  Rng &rng) override;
  void observe(const RoundObservation &obs, const Estimator &est) override;
  DualVector lambda() const override { return lambda_; }

  const Vector &target() const { return target_; }
  double gamma() const { return cfg_.gamma; }
  /// sum over dual updates of (lcb_played - target).
  const Vector &lcb_deviation_sum() const { return lcb_dev_sum_; }

private:
  PgdConfig cfg_;
  Vector target_;
  DualVector lambda_;
  Vector lcb_dev_sum_;
};

/// Adaptive step size by regimes: gamma_k = 2^k / sqrt(T), restarting the
/// fixed-step routine with lambda = 0 whenever realized costs since the
/// regime start exceed the target by more than M_{T,delta,k}. Estimators
/// carry over across regimes.
class AdaptivePgdStrategy final : public Strategy {
public:
  AdaptivePgdStrategy(AdaptiveConfig cfg, BudgetVector budgets,
                      std::size_t num_actions);

  ActionId select(const ContextVector &x, const Estimator &est,
                  Rng &rng) override;
  void observe(const RoundObservation &obs, const Estimator &est) override;
  DualVector lambda() const override { return lambda_; }
  int regime() const override { return k_; }

  double gamma() const { return gamma_k(k_); }
  double gamma_k(int k) const;
  double threshold() const { return threshold_; }
  double regime_risk() const;
  const Vector &target() const { return target_; }
  const Vector &regime_cost_sum() const { return regime_cost_sum_; }
  /// Start rounds T_0, T_1, ... in harness round numbering.
  const std::vector<std::size_t> &regime_starts() const { return starts_; }
  /// Regime index at which no further break is allowed (ilog T).
  int max_regime() const { return max_k_; }
  std::size_t cap_hits() const { return cap_hits_; }

private:
  void enter_regime(int k, std::size_t start);

  AdaptiveConfig cfg_;
  BudgetVector budgets_;
  std::size_t num_actions_;
  Vector target_;
  DualVector lambda_;
  int k_ = 0;
  int max_k_ = 0;
  double threshold_ = 0.0;
  std::size_t rounds_in_regime_ = 0;
  Vector regime_cost_sum_;
  std::vector<std::size_t> starts_;
  std::size_t cap_hits_ = 0;
};

} // namespace cbwk
