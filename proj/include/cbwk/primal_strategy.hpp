#pragma once

#include "cbwk/strategy.hpp"

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace cbwk {

/// Total-variation error bound of the empirical distribution over a finite
/// support: min(1, c sqrt(|X| ln(2/delta) / max(t, 1))).
double xi(std::size_t t, double delta, std::size_t support_size,
          double xi_constant = std::sqrt(2.0));

/// Xi_{T,delta} = sum_{t=1}^T xi_{t-1,delta}
double xi_sum(std::size_t horizon, double delta, std::size_t support_size,
              double xi_constant = std::sqrt(2.0));

/// sqrt(2 T ln((d+1) / (delta/4))): the deviation constant of the primal
/// slack schedules, evaluated at risk delta/4.
double alpha_prop(double horizon, double delta, Index d);

/// sqrt(2 t ln(2 (d+1) T / (delta/4))): the time-uniform variant.
double alpha_seq(double t, double delta, Index d, double horizon);

/// (2 alpha + beta + Xi) / T and (2 alpha + beta + 2 Xi) / T.
std::pair<double, double> delta_bars(double horizon, double alpha, double beta,
                                     double xi_total);

/// Empirical context distribution over a declared finite support.
class EmpiricalContextDistribution {
public:
  explicit EmpiricalContextDistribution(std::size_t support_size,
                                        double xi_constant = std::sqrt(2.0));

  void observe(std::size_t index);
  /// counts / t; uniform before any observation.
  Vector probabilities() const;
  std::size_t total() const { return t_; }
  std::size_t support_size() const { return counts_.size(); }
  double xi(double delta) const;

private:
  std::vector<std::size_t> counts_;
  std::size_t t_ = 0;
  double xi_constant_;
};

struct LpPolicySolution {
  std::vector<PolicyDistribution> policies; ///< one per support context
  double objective = 0.0;
  bool feasible = false;
};

/// max sum_x w_x sum_a reward(x,a) pi_a(x)
/// s.t. sum_x w_x sum_a cost(x)(:,a) pi_a(x) <= rhs, pi(x) in the simplex.
/// `reward` is |X| x |A|; `cost[x]` is d x |A|.
LpPolicySolution solve_constrained_policy(const Vector &weights,
                                          const Matrix &reward,
                                          const std::vector<Matrix> &cost,
                                          const Vector &rhs);

enum class SlackMode { soft, hard_null, hard_general };

enum class BetaSource {
  theoretical, ///< C_beta sqrt(T) ln(T / (delta/4))
  running,     ///< realized beta accumulated so far
  fixed,       ///< user-supplied constant
};

struct PrimalConfig {
  double delta = 0.05;
  std::size_t horizon = 10000;
  SlackMode slack = SlackMode::soft;
  BetaSource beta_source = BetaSource::running;
  double beta_constant = 1.0;
  double beta_fixed = 0.0;
  double xi_constant = std::sqrt(2.0);
  BudgetVector budgets;
  std::size_t num_actions = 0;
  std::optional<ActionId> null_action;
  /// The true context distribution, when known. Replaces nu_hat and sets
  /// every xi term to 0.
  std::optional<Vector> known_weights;
};

/// Signed slack b_t of the configured schedule.
class SlackSchedule {
public:
  SlackSchedule(const PrimalConfig &cfg, std::size_t support_size);

  /// b_t for round t >= 1 given the beta value to use.
  double slack(std::size_t t, double beta) const;
  double alpha() const { return alpha_; }
  double xi_total() const { return xi_total_; }
  SlackMode mode() const { return mode_; }

private:
  SlackMode mode_;
  double delta_q_; ///< delta / 4
  double horizon_;
  std::size_t support_size_;
  double xi_constant_;
  bool exact_nu_;
  double alpha_;
  double xi_total_;
};

/// Primal strategy for finite context sets: each round solves the
/// empirical LP with optimistic estimates and slack-adjusted budgets, then
/// samples the action from the resulting policy at the observed context.
class PrimalStrategy final : public Strategy {
public:
  PrimalStrategy(PrimalConfig cfg, std::vector<ContextVector> support);

  ActionId select(const ContextVector &x, const Estimator &est,
                  Rng &rng) override;
  void observe(const RoundObservation &obs, const Estimator &est) override;

  const SlackSchedule &schedule() const { return schedule_; }
  const EmpiricalContextDistribution &nu_hat() const { return nu_hat_; }
  double beta() const;
  std::size_t infeasible_rounds() const { return infeasible_; }
  const LpPolicySolution &last_solution() const { return last_; }

private:
  PrimalConfig cfg_;
  std::vector<ContextVector> support_;
  EmpiricalContextDistribution nu_hat_;
  SlackSchedule schedule_;
  BetaAccumulator beta_;
  std::size_t round_ = 0;
  std::size_t infeasible_ = 0;
  LpPolicySolution last_;
};

} // namespace cbwk
