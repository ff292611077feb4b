#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace cbwk {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;
using Index = Eigen::Index;

/// One generator per simulation run. Per round the environment draws are
/// consumed in the order (context, reward, cost); strategy draws (warm-up
/// exploration, policy sampling) sit between context and reward.
using Rng = std::mt19937_64;

class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A sampled context. `group` is the group index gr(x) when the environment
/// has groups; finite-support environments store the support index in
/// coords(0).
struct ContextVector {
  Vector coords;
  std::optional<int> group;

  ContextVector() = default;
  explicit ContextVector(Vector c, std::optional<int> g = std::nullopt);
};

struct ActionId {
  std::size_t index = 0;

  constexpr ActionId() = default;
  constexpr explicit ActionId(std::size_t i) : index(i) {}
  friend constexpr bool operator==(ActionId, ActionId) = default;
  friend constexpr auto operator<=>(ActionId, ActionId) = default;
};

/// Average cost constraints B in [0,1]^d.
class BudgetVector {
public:
  BudgetVector() = default;
  explicit BudgetVector(Vector b);

  const Vector &values() const { return b_; }
  Index dim() const { return b_.size(); }
  double operator[](Index i) const { return b_(i); }
  double min() const { return b_.minCoeff(); }

private:
  Vector b_;
};

/// Nonnegative Lagrange multipliers.
class DualVector {
public:
  DualVector() = default;
  explicit DualVector(Index d) : lambda_(Vector::Zero(d)) {}
  /// Throws if any component is negative or non-finite.
  explicit DualVector(Vector lambda);

  /// Positive part of an arbitrary vector.
  template <typename Derived>
  static DualVector projected(const Eigen::MatrixBase<Derived> &v) {
    DualVector out;
    out.lambda_ = v.cwiseMax(0.0);
    return out;
  }

  const Vector &values() const { return lambda_; }
  Index dim() const { return lambda_.size(); }
  double operator[](Index i) const { return lambda_(i); }
  double norm() const { return lambda_.norm(); }
  void reset() { lambda_.setZero(); }

private:
  Vector lambda_;
};

/// A distribution over actions.
class PolicyDistribution {
public:
  PolicyDistribution() = default;
  explicit PolicyDistribution(Vector probs);
  static PolicyDistribution point_mass(std::size_t n, ActionId a);
  static PolicyDistribution uniform(std::size_t n);

  const Vector &probs() const { return probs_; }
  std::size_t size() const { return static_cast<std::size_t>(probs_.size()); }
  ActionId sample(Rng &rng) const;

private:
  Vector probs_;
};

} // namespace cbwk
