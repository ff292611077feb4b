#pragma once

#include "cbwk/core.hpp"
#include "cbwk/strategy.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace cbwk {

/// A finite distribution over contexts with tabulated expectations, stored
/// action-major so that the dual objective is a handful of dense products.
struct DualSample {
  Vector weights;           ///< S, sums to 1
  Matrix reward;            ///< S x |A|
  std::vector<Matrix> cost; ///< one S x d block per action
  Vector budgets;           ///< d

  Index size() const { return weights.size(); }
  Index num_actions() const { return reward.cols(); }
  Index dim() const { return budgets.size(); }
  void validate() const;

  /// From the context-major layout used by the LP (`cost[x]` is d x |A|).
  static DualSample from_tables(const Vector &weights, const Matrix &reward,
                                const std::vector<Matrix> &cost,
                                const Vector &budgets);
  /// S i.i.d. contexts from `env`, equally weighted.
  static DualSample draw(const Environment &env, const Vector &budgets,
                         Index samples, Rng &rng);
};

/// G(lambda) = sum_x w_x max_a { r(x,a) - <c(x,a) - B, lambda> }
double dual_objective(const Vector &lambda, const DualSample &s);

/// sum_x w_x (B - c(x, a*(x))) with a* the lowest maximizing index.
Vector dual_subgradient(const Vector &lambda, const DualSample &s);

/// Both at once, sharing the per-context argmax.
double dual_objective(const Vector &lambda, const DualSample &s, Vector *grad);

struct DualMinOptions {
  std::size_t iters = 5000;
  /// Step eta0 / sqrt(k); eta0 <= 0 selects 1 / sqrt(d).
  double eta0 = 0.0;
  /// Cutting-plane refinement after the subgradient phase.
  bool polish = true;
  std::size_t max_cuts = 400;
  double tol = 1e-9;
};

struct DualMinimum {
  Vector lambda;
  double value = 0.0;
  /// Certified lower bound on min G (-inf when no certificate was obtained).
  double lower_bound = -std::numeric_limits<double>::infinity();
  bool converged = false;
};

/// Projected subgradient descent with tail averaging, optionally followed by
/// Kelley's cutting-plane method on a box around the subgradient estimate.
DualMinimum minimize_dual(const DualSample &s, const DualMinOptions &opts = {});

struct OptEstimate {
  double value = 0.0;
  double std_error = 0.0; ///< standard error of the mean over reps
  std::size_t reps = 0;
  DualVector lambda_star; ///< averaged over reps
  std::size_t converged_reps = 0;
};

/// J independent S-sample dual minimizations; rep j draws from seed + j.
OptEstimate estimate_opt(const Environment &env, const Vector &budgets,
                         Index samples, std::size_t reps, std::uint64_t seed,
                         const DualMinOptions &opts = {});

/// Optimal static policy value by exact LP. Empty when infeasible.
std::optional<double> brute_force_opt(const DualSample &s);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// ||lambda*_{B - b1}|| against (OPT(B - b1) - OPT(Bt)) / min(B - b1 - Bt).
BoundCheck lambda_norm_bound_check(const DualSample &s, double b,
                                   const Vector &b_tilde);

/// Null-cost-action form: rhs = 2 (OPT(B) - OPT(0)) / min B, b <= min B / 2.
BoundCheck null_action_bound_check(const DualSample &s, double b);

/// Plays argmax_a ucb(a) - <lcb(a) - target, lambda> with lambda held fixed.
class MixedPolicyStrategy final : public Strategy {
public:
  MixedPolicyStrategy(DualVector lambda, Vector target, std::size_t num_actions,
                      double delta);

  ActionId select(const ContextVector &x, const Estimator &est,
                  Rng &rng) override;
  void observe(const RoundObservation &, const Estimator &) override {}
  DualVector lambda() const override { return lambda_; }

private:
  DualVector lambda_;
  Vector target_;
  std::size_t num_actions_;
  double delta_;
};

/// Samples from a fixed policy per support context (finite environments).
class StaticPolicyStrategy final : public Strategy {
public:
  explicit StaticPolicyStrategy(std::vector<PolicyDistribution> policies);

  ActionId select(const ContextVector &x, const Estimator &est,
                  Rng &rng) override;
  void observe(const RoundObservation &, const Estimator &) override {}

private:
  std::vector<PolicyDistribution> policies_;
};

} // namespace cbwk
