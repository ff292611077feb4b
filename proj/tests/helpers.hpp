#pragma once

#include "cbwk/estimators.hpp"

namespace cbwk::testing {

/// Estimator returning fixed estimates and widths, for exercising clipping.
class FixedEstimator final : public Estimator {
public:
  FixedEstimator(double r_hat, Vector c_hat, double eps)
      : r_hat_(r_hat), c_hat_(std::move(c_hat)), eps_(eps) {}

  void update(const ContextVector &, ActionId, double, const Vector &) override {
    ++t_;
  }
  double reward_estimate(const ContextVector &, ActionId) const override {
    return r_hat_;
  }
  Vector cost_estimate(const ContextVector &, ActionId) const override {
    return c_hat_;
  }
  double reward_epsilon(const ContextVector &, ActionId, double) const override {
    return eps_;
  }
  double cost_epsilon(const ContextVector &, ActionId, double) const override {
    return eps_;
  }
  std::size_t rounds() const override { return t_; }

private:
  double r_hat_;
  Vector c_hat_;
  double eps_;
  std::size_t t_ = 0;
};

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs)
    v(i++) = x;
  return v;
}

} // namespace cbwk::testing
