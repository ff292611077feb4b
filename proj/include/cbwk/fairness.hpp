#pragma once

#include "cbwk/estimators.hpp"

#include <memory>

namespace cbwk {

/// Known group proportions gamma_g = nu{x : gr(x) = g}.
class GroupSpec {
public:
  explicit GroupSpec(Vector proportions);
  static GroupSpec balanced(std::size_t groups);

  const Vector &proportions() const { return gamma_; }
  std::size_t size() const { return static_cast<std::size_t>(gamma_.size()); }
  double operator[](std::size_t g) const {
    return gamma_(static_cast<Index>(g));
  }

private:
  Vector gamma_;
};

/// (c_spd, (c_spd 1{gr=g} - gamma_g c_spd, gamma_g c_spd - c_spd 1{gr=g})_g)
Vector build_fairness_cost(double c_spd, int group, const GroupSpec &spec);

/// (B_total, (gamma_g tau, gamma_g tau)_g)
BudgetVector build_fairness_budget(double b_total, double tau,
                                   const GroupSpec &spec);

/// Court-appearance simulation: three actions, logistic appearance
/// probabilities, deterministic spend costs and eight fairness costs.
///
/// Contexts: coords = (age, proximity, poverty), each U[0,1], and a group
/// in {0, 1} with probability 1/2 each.
///
/// Cost components, in order:
///   0: ride spend        1: voucher spend
///   2: ride, group 0     3: ride, group 1
///   4: voucher, group 0  5: voucher, group 1
///   6..9: negations of 2..5
/// where the fairness terms are 2 1{a} 1{gr=g} - 1{a}.
class CourtEnvironment final : public Environment {
public:
  static constexpr std::size_t kControl = 0;
  static constexpr std::size_t kVoucher = 1;
  static constexpr std::size_t kRide = 2;
  static constexpr Index kCostDim = 10;
  static constexpr double kRideBudget = 0.05;
  static constexpr double kVoucherBudget = 0.20;

  explicit CourtEnvironment(
      double tau, SigmoidConvention conv = SigmoidConvention::standard);

  std::size_t num_actions() const override { return 3; }
  Index cost_dim() const override { return kCostDim; }

  ContextVector sample_context(Rng &rng) const override;
  double expected_reward(const ContextVector &x, ActionId a) const override;
  Vector expected_cost(const ContextVector &x, ActionId a) const override;

  double tau() const { return tau_; }
  SigmoidConvention convention() const { return conv_; }
  /// (0.05, 0.20, tau x 8)
  BudgetVector budgets() const;
  /// Selects the two spend components: (1, 1, 0, ..., 0).
  static Vector spend_mask();

  static Vector true_parameters();

private:
  double tau_;
  SigmoidConvention conv_;
};

/// phi(x, a) = (age, prox 1{voucher}, prox 1{voucher} 1{gr=0},
///              pov 1{ride}, pov 1{ride} 1{gr=0})
class CourtFeatureMap final : public FeatureMap {
public:
  Index dim() const override { return 5; }
  Vector evaluate(const ContextVector &x, ActionId a) const override;
};

double court_expected_reward(const ContextVector &x, ActionId a,
                             SigmoidConvention conv = SigmoidConvention::standard);
Vector court_cost(const ContextVector &x, ActionId a);

} // namespace cbwk
