#pragma once

#include "cbwk/core.hpp"

#include <vector>

namespace cbwk {

/// An environment over a finite context set with tabulated expectations.
/// Context i is represented with coords = (i). Rewards are Bernoulli; costs
/// are deterministic, drawn in {0, 1} (nonnegative tables only) or drawn in
/// {-1, +1}, always with the tabulated mean.
class FiniteEnvironment final : public Environment {
public:
  enum class CostNoise { none, bernoulli, rademacher };

  /// `reward` is |X| x |A| with entries in [0,1]; `cost[x]` is d x |A| with
  /// entries in [-1,1]; `weights` is the context distribution.
  FiniteEnvironment(Vector weights, Matrix reward, std::vector<Matrix> cost,
                    CostNoise noise = CostNoise::none);

  std::size_t num_actions() const override {
    return static_cast<std::size_t>(reward_.cols());
  }
  Index cost_dim() const override { return cost_.front().rows(); }
  bool finite_support() const override { return true; }

  ContextVector sample_context(Rng &rng) const override;
  double expected_reward(const ContextVector &x, ActionId a) const override;
  Vector expected_cost(const ContextVector &x, ActionId a) const override;
  Vector sample_cost(const ContextVector &x, ActionId a,
                     Rng &rng) const override;

  std::size_t num_contexts() const { return cost_.size(); }
  const Vector &weights() const { return weights_; }
  const Matrix &reward_table() const { return reward_; }
  const std::vector<Matrix> &cost_tables() const { return cost_; }
  std::vector<ContextVector> support() const;
  static ContextVector context(std::size_t index);

private:
  std::size_t index_of(const ContextVector &x) const;

  Vector weights_;
  Vector cumulative_;
  Matrix reward_;
  std::vector<Matrix> cost_;
  CostNoise noise_;
};

} // namespace cbwk
