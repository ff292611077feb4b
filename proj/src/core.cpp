#include "cbwk/core.hpp"

#include <cmath>

namespace cbwk {

ContextVector::ContextVector(Vector c, std::optional<int> g)
    : coords(std::move(c)), group(g) {
  if (!coords.allFinite())
    throw ArgumentError("ContextVector: non-finite coordinate");
  if (group && *group < 0)
    throw ArgumentError("ContextVector: negative group index");
}

BudgetVector::BudgetVector(Vector b) : b_(std::move(b)) {
  if (b_.size() < 1)
    throw ArgumentError("BudgetVector: dimension must be at least 1");
  for (Index i = 0; i < b_.size(); ++i)
    if (!(b_(i) >= 0.0 && b_(i) <= 1.0))
      throw ArgumentError("BudgetVector: component " + std::to_string(i) +
                          " outside [0,1]");
}

DualVector::DualVector(Vector lambda) : lambda_(std::move(lambda)) {
  if (!lambda_.allFinite() || (lambda_.array() < 0.0).any())
    throw ArgumentError("DualVector: components must be finite and >= 0");
}

PolicyDistribution::PolicyDistribution(Vector probs) : probs_(std::move(probs)) {
  if (probs_.size() == 0)
    throw ArgumentError("PolicyDistribution: empty action set");
  if ((probs_.array() < -1e-12).any() || !probs_.allFinite())
    throw ArgumentError("PolicyDistribution: negative probability");
  if (std::abs(probs_.sum() - 1.0) > 1e-9)
    throw ArgumentError("PolicyDistribution: probabilities do not sum to 1");
  probs_ = probs_.cwiseMax(0.0);
}

PolicyDistribution PolicyDistribution::point_mass(std::size_t n, ActionId a) {
  if (a.index >= n)
    throw ArgumentError("PolicyDistribution: action out of range");
  Vector p = Vector::Zero(static_cast<Index>(n));
  p(static_cast<Index>(a.index)) = 1.0;
  return PolicyDistribution(std::move(p));
}

PolicyDistribution PolicyDistribution::uniform(std::size_t n) {
  return PolicyDistribution(
      Vector::Constant(static_cast<Index>(n), 1.0 / static_cast<double>(n)));
}

ActionId PolicyDistribution::sample(Rng &rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double draw = u(rng);
  double acc = 0.0;
  for (Index i = 0; i < probs_.size(); ++i) {
    acc += probs_(i);
    if (draw < acc)
      return ActionId(static_cast<std::size_t>(i));
  }
  // Rounding: fall back to the last action with positive mass.
  for (Index i = probs_.size() - 1; i >= 0; --i)
    if (probs_(i) > 0.0)
      return ActionId(static_cast<std::size_t>(i));
  return ActionId(0);
}

double Environment::sample_reward(const ContextVector &x, ActionId a,
                                  Rng &rng) const {
  std::bernoulli_distribution coin(expected_reward(x, a));
  return coin(rng) ? 1.0 : 0.0;
}

Vector Environment::sample_cost(const ContextVector &x, ActionId a,
                                Rng &) const {
  return expected_cost(x, a);
}

void Trajectory::append(RoundRecord rec) {
  if (cum_cost_.size() == 0)
    cum_cost_ = Vector::Zero(rec.c.size());
  cum_reward_ += rec.r;
  cum_cost_ += rec.c;
  records_.push_back(std::move(rec));
}

double regret(const Trajectory &traj, double opt_per_round) {
  if (traj.empty())
    throw ArgumentError("regret: empty trajectory");
  return static_cast<double>(traj.size()) * opt_per_round - traj.cum_reward();
}

double cost_excess_norm(const Trajectory &traj, const Vector &target,
                        std::size_t upto) {
  if (upto > traj.size())
    throw ArgumentError("cost_excess_norm: upto exceeds trajectory length");
  Vector acc = -static_cast<double>(upto) * target;
  for (std::size_t i = 0; i < upto; ++i)
    acc += traj.records()[i].c;
  return positive_part_norm(acc);
}

} // namespace cbwk
