#pragma once

#include "cbwk/core.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace cbwk {

// ---------------------------------------------------------------------------
// Feature maps
// ---------------------------------------------------------------------------

class FeatureMap {
public:
  virtual ~FeatureMap() = default;
  virtual Index dim() const = 0;
  virtual Vector evaluate(const ContextVector &x, ActionId a) const = 0;
};

/// Wraps a callable; the callable must always return vectors of length `dim`.
class FunctionFeatureMap final : public FeatureMap {
public:
  using Fn = std::function<Vector(const ContextVector &, ActionId)>;
  FunctionFeatureMap(Index dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}
  Index dim() const override { return dim_; }
  Vector evaluate(const ContextVector &x, ActionId a) const override;

private:
  Index dim_;
  Fn fn_;
};

/// One-hot encoding of (support index, action) for finite context sets.
/// The support index is read from coords(0).
class TabularFeatureMap final : public FeatureMap {
public:
  TabularFeatureMap(std::size_t num_contexts, std::size_t num_actions)
      : num_contexts_(num_contexts), num_actions_(num_actions) {}
  Index dim() const override {
    return static_cast<Index>(num_contexts_ * num_actions_);
  }
  Vector evaluate(const ContextVector &x, ActionId a) const override;

private:
  std::size_t num_contexts_;
  std::size_t num_actions_;
};

/// Known, exact cost function c(x, a) (used when costs need no estimation).
using CostFunction = std::function<Vector(const ContextVector &, ActionId)>;

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// Sequential estimates of r and c with known error widths. Before any data
/// is seen the estimates are r = 1/2, c = 0 with width kNoDataWidth, so the
/// clipped bounds are maximally optimistic (ucb = 1, lcb = -1).
class Estimator {
public:
  static constexpr double kNoDataWidth = 2.0;

  virtual ~Estimator() = default;

  virtual void update(const ContextVector &x, ActionId a, double r,
                      const Vector &c) = 0;

  virtual double reward_estimate(const ContextVector &x, ActionId a) const = 0;
  virtual Vector cost_estimate(const ContextVector &x, ActionId a) const = 0;
  virtual double reward_epsilon(const ContextVector &x, ActionId a,
                                double delta) const = 0;
  virtual double cost_epsilon(const ContextVector &x, ActionId a,
                              double delta) const = 0;
  /// Number of observations incorporated so far.
  virtual std::size_t rounds() const = 0;

  /// epsilon_t(x, a, delta): the common width covering reward and costs.
  double epsilon(const ContextVector &x, ActionId a, double delta) const;
  /// clip[r_hat + eps]_0^1
  double reward_ucb(const ContextVector &x, ActionId a, double delta) const;
  /// clip[c_hat - eps 1]_{-1}^1
  Vector cost_lcb(const ContextVector &x, ActionId a, double delta) const;

protected:
  static void validate_observation(double r, const Vector &c);
};

/// Exact knowledge of r and c; all widths are zero.
class OracleEstimator final : public Estimator {
public:
  explicit OracleEstimator(const Environment &env) : env_(&env) {}

  void update(const ContextVector &, ActionId, double r,
              const Vector &c) override;
  double reward_estimate(const ContextVector &x, ActionId a) const override;
  Vector cost_estimate(const ContextVector &x, ActionId a) const override;
  double reward_epsilon(const ContextVector &, ActionId,
                        double) const override {
    return 0.0;
  }
  double cost_epsilon(const ContextVector &, ActionId, double) const override {
    return 0.0;
  }
  std::size_t rounds() const override { return t_; }

private:
  const Environment *env_;
  std::size_t t_ = 0;
};

struct LinearUcbOptions {
  double c_delta = 1.0;
  double ridge = 1.0;
  /// Rebuild the maintained inverse from V every this many updates.
  std::size_t recompute_every = 1000;
};

/// Ridge regression estimates of r and every cost component with a shared
/// design matrix V_t = sum phi phi^T + ridge I and width
/// eps_t = c_delta * sqrt(phi^T V_t^{-1} phi).
/// If `known_costs` is set, costs are taken from it with zero width.
class LinearUcbEstimator final : public Estimator {
public:
  LinearUcbEstimator(std::shared_ptr<const FeatureMap> phi, Index cost_dim,
                     LinearUcbOptions opts = {},
                     CostFunction known_costs = nullptr);

  void update(const ContextVector &x, ActionId a, double r,
              const Vector &c) override;
  double reward_estimate(const ContextVector &x, ActionId a) const override;
  Vector cost_estimate(const ContextVector &x, ActionId a) const override;
  double reward_epsilon(const ContextVector &x, ActionId a,
                        double delta) const override;
  double cost_epsilon(const ContextVector &x, ActionId a,
                      double delta) const override;
  std::size_t rounds() const override { return t_; }

  const Matrix &design() const { return v_; }
  const Matrix &design_inverse() const { return v_inv_; }
  /// Relative Frobenius error between the maintained inverse and a fresh one.
  double inverse_drift() const;

private:
  double width(const Vector &phi) const;

  std::shared_ptr<const FeatureMap> phi_;
  Index cost_dim_;
  LinearUcbOptions opts_;
  CostFunction known_costs_;
  Matrix v_;
  Matrix v_inv_;
  Matrix xty_;   // p x (1 + d): sum phi * (r, c^T)
  Matrix theta_; // p x (1 + d)
  std::size_t t_ = 0;
};

enum class SigmoidConvention {
  standard, ///< 1 / (1 + e^{-u})
  negated,  ///< 1 / (1 + e^{u})
};

double sigmoid(double u, SigmoidConvention conv = SigmoidConvention::standard);

struct LogisticFit {
  Vector mu;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// The 1e-8 floor ridge had to be applied because the unpenalized
  /// problem has no finite optimum (separation).
  bool floored = false;
};

inline constexpr double kFloorRidge = 1e-8;

/// Maximizes sum_s y_s ln s(z_s) + (1 - y_s) ln(1 - s(z_s)) - ridge/2 |mu|^2
/// with z_s = features.row(s) . mu, by damped Newton-Raphson. Stops at
/// gradient norm <= 1e-8 or after 100 iterations.
LogisticFit fit_logistic_mle(const Eigen::Ref<const Matrix> &features,
                             const Eigen::Ref<const Vector> &labels,
                             double ridge,
                             const Vector *warm_start = nullptr);

struct LogisticUcbOptions {
  double c_delta = 0.025;
  double ridge = 0.0;
  /// Refit every round up to this many observations ...
  std::size_t refit_all_until = 500;
  /// ... and every `refit_every` rounds afterwards.
  std::size_t refit_every = 10;
  SigmoidConvention convention = SigmoidConvention::standard;
};

/// Logistic-model reward estimates with width
/// eps_t = c_delta (1 + ln t) sqrt(phi^T V_t^{-1} phi).
/// Costs are known exactly (zero width).
class LogisticUcbEstimator final : public Estimator {
public:
  LogisticUcbEstimator(std::shared_ptr<const FeatureMap> phi,
                       CostFunction known_costs, LogisticUcbOptions opts = {});

  void update(const ContextVector &x, ActionId a, double r,
              const Vector &c) override;
  double reward_estimate(const ContextVector &x, ActionId a) const override;
  Vector cost_estimate(const ContextVector &x, ActionId a) const override;
  double reward_epsilon(const ContextVector &x, ActionId a,
                        double delta) const override;
  double cost_epsilon(const ContextVector &, ActionId, double) const override {
    return 0.0;
  }
  std::size_t rounds() const override { return t_; }

  const Vector &mu() const { return mu_; }
  const Matrix &design() const { return v_; }
  std::size_t refits() const { return refits_; }
  /// Forces a refit on the full buffer now.
  void refit();

private:
  std::shared_ptr<const FeatureMap> phi_;
  CostFunction known_costs_;
  LogisticUcbOptions opts_;
  Matrix v_;
  Matrix v_inv_;
  Vector mu_;
  Matrix buffer_x_; // grows by doubling; first t_ rows are live
  Vector buffer_y_;
  std::size_t t_ = 0;
  std::size_t refits_ = 0;
  bool warned_separation_ = false;
};

/// C (1 + ln max(t, 1)) sqrt(phi^T V^{-1} phi)
double logistic_width(double c_delta, std::size_t t, const Vector &phi,
                      const Matrix &v_inv);

/// beta_t = sum_{tau <= t} eps_{tau - 1}(x_tau, a_tau, delta).
class BetaAccumulator {
public:
  void add(double eps);
  double value() const { return sum_; }
  std::size_t count() const { return n_; }

private:
  double sum_ = 0.0;
  std::size_t n_ = 0;
};

} // namespace cbwk
