#include "cbwk/finite_env.hpp"

#include <cmath>

namespace cbwk {

FiniteEnvironment::FiniteEnvironment(Vector weights, Matrix reward,
                                     std::vector<Matrix> cost, CostNoise noise)
    : weights_(std::move(weights)), reward_(std::move(reward)),
      cost_(std::move(cost)), noise_(noise) {
  const Index nx = weights_.size();
  if (nx == 0 || reward_.rows() != nx || static_cast<Index>(cost_.size()) != nx)
    throw ArgumentError("FiniteEnvironment: inconsistent context count");
  if (reward_.cols() == 0)
    throw ArgumentError("FiniteEnvironment: empty action set");
  if ((weights_.array() < 0.0).any() || std::abs(weights_.sum() - 1.0) > 1e-9)
    throw ArgumentError("FiniteEnvironment: weights must form a distribution");
  if ((reward_.array() < 0.0).any() || (reward_.array() > 1.0).any())
    throw ArgumentError("FiniteEnvironment: rewards must lie in [0,1]");
  for (const Matrix &c : cost_) {
    if (c.rows() != cost_.front().rows() || c.cols() != reward_.cols() ||
        c.rows() == 0)
      throw ArgumentError("FiniteEnvironment: cost table shape mismatch");
    if ((c.array().abs() > 1.0).any())
      throw ArgumentError("FiniteEnvironment: costs must lie in [-1,1]");
    if (noise_ == CostNoise::bernoulli && (c.array() < 0.0).any())
      throw ArgumentError("FiniteEnvironment: Bernoulli costs need nonnegative means");
  }
  cumulative_.resize(nx);
  double acc = 0.0;
  for (Index i = 0; i < nx; ++i) {
    acc += weights_(i);
    cumulative_(i) = acc;
  }
}

ContextVector FiniteEnvironment::context(std::size_t index) {
  Vector c(1);
  c(0) = static_cast<double>(index);
  return ContextVector(std::move(c));
}

std::vector<ContextVector> FiniteEnvironment::support() const {
  std::vector<ContextVector> out;
  out.reserve(cost_.size());
  for (std::size_t i = 0; i < cost_.size(); ++i)
    out.push_back(context(i));
  return out;
}

std::size_t FiniteEnvironment::index_of(const ContextVector &x) const {
  if (x.coords.size() != 1)
    throw ArgumentError("FiniteEnvironment: malformed context");
  const auto i = static_cast<std::size_t>(x.coords(0));
  if (i >= cost_.size())
    throw ArgumentError("FiniteEnvironment: context outside support");
  return i;
}

ContextVector FiniteEnvironment::sample_context(Rng &rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double draw = u(rng);
  Index i = 0;
  while (i + 1 < cumulative_.size() && draw >= cumulative_(i))
    ++i;
  return context(static_cast<std::size_t>(i));
}

double FiniteEnvironment::expected_reward(const ContextVector &x,
                                          ActionId a) const {
  return reward_(static_cast<Index>(index_of(x)), static_cast<Index>(a.index));
}

Vector FiniteEnvironment::expected_cost(const ContextVector &x,
                                        ActionId a) const {
  return cost_[index_of(x)].col(static_cast<Index>(a.index));
}

Vector FiniteEnvironment::sample_cost(const ContextVector &x, ActionId a,
                                      Rng &rng) const {
  Vector mean = expected_cost(x, a);
  if (noise_ == CostNoise::none)
    return mean;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index i = 0; i < mean.size(); ++i) {
    if (noise_ == CostNoise::bernoulli)
      mean(i) = (u(rng) < mean(i)) ? 1.0 : 0.0;
    else
      mean(i) = (u(rng) < 0.5 * (1.0 + mean(i))) ? 1.0 : -1.0;
  }
  return mean;
}

} // namespace cbwk
