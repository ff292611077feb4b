#pragma once

#include "cbwk/types.hpp"

#include <vector>

namespace cbwk {

/// clip[x]_lo^hi = min{max{x, lo}, hi}.
template <typename Scalar> Scalar clip(Scalar x, Scalar lo, Scalar hi) {
  if (lo > hi)
    throw ArgumentError("clip: lower bound exceeds upper bound");
  return std::min(std::max(x, lo), hi);
}

/// Componentwise clip of a vector expression.
template <typename Derived>
VectorX<typename Derived::Scalar> clip(const Eigen::MatrixBase<Derived> &v,
                                       typename Derived::Scalar lo,
                                       typename Derived::Scalar hi) {
  if (lo > hi)
    throw ArgumentError("clip: lower bound exceeds upper bound");
  return v.cwiseMax(lo).cwiseMin(hi);
}

/// Interface of a stochastic CBwK environment.
class Environment {
public:
  virtual ~Environment() = default;

  virtual std::size_t num_actions() const = 0;
  virtual Index cost_dim() const = 0;

  virtual ContextVector sample_context(Rng &rng) const = 0;
  virtual double expected_reward(const ContextVector &x, ActionId a) const = 0;
  virtual Vector expected_cost(const ContextVector &x, ActionId a) const = 0;

  /// Bernoulli draw with mean expected_reward.
  virtual double sample_reward(const ContextVector &x, ActionId a,
                               Rng &rng) const;
  /// Defaults to the deterministic expected cost (no draw consumed).
  virtual Vector sample_cost(const ContextVector &x, ActionId a,
                             Rng &rng) const;

  /// True when contexts come from a finite declared support.
  virtual bool finite_support() const { return false; }
};

struct RoundRecord {
  std::size_t t = 0;
  ContextVector x;
  ActionId a;
  double r = 0.0;
  Vector c;
  DualVector lambda_before;
  int regime = 0;
  bool warmup = false;
};

class Trajectory {
public:
  Trajectory() = default;
  explicit Trajectory(Index cost_dim) : cum_cost_(Vector::Zero(cost_dim)) {}

  void append(RoundRecord rec);

  const std::vector<RoundRecord> &records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  double cum_reward() const { return cum_reward_; }
  const Vector &cum_cost() const { return cum_cost_; }

private:
  std::vector<RoundRecord> records_;
  double cum_reward_ = 0.0;
  Vector cum_cost_;
};

/// R_T = T * opt - sum r_t.
double regret(const Trajectory &traj, double opt_per_round);

/// || (sum_{tau <= upto} c_tau - upto * target)_+ ||_2
double cost_excess_norm(const Trajectory &traj, const Vector &target,
                        std::size_t upto);

/// Positive-part norm of an accumulated deviation vector.
template <typename Derived>
typename Derived::Scalar positive_part_norm(const Eigen::MatrixBase<Derived> &v) {
  return v.cwiseMax(typename Derived::Scalar(0)).norm();
}

} // namespace cbwk
