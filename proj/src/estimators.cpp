#include "cbwk/estimators.hpp"

#include "cbwk/diagnostics.hpp"

#include <cmath>
#include <string>

namespace cbwk {

Vector FunctionFeatureMap::evaluate(const ContextVector &x, ActionId a) const {
  Vector v = fn_(x, a);
  if (v.size() != dim_ || !v.allFinite())
    throw ArgumentError("FeatureMap: output has wrong dimension or is not finite");
  return v;
}

Vector TabularFeatureMap::evaluate(const ContextVector &x, ActionId a) const {
  const auto idx = static_cast<std::size_t>(x.coords(0));
  if (idx >= num_contexts_ || a.index >= num_actions_)
    throw ArgumentError("TabularFeatureMap: context or action out of range");
  Vector v = Vector::Zero(dim());
  v(static_cast<Index>(idx * num_actions_ + a.index)) = 1.0;
  return v;
}

// --- Estimator ---------------------------------------------------------------

double Estimator::epsilon(const ContextVector &x, ActionId a,
                          double delta) const {
  return std::max(reward_epsilon(x, a, delta), cost_epsilon(x, a, delta));
}

double Estimator::reward_ucb(const ContextVector &x, ActionId a,
                             double delta) const {
  return clip(reward_estimate(x, a) + reward_epsilon(x, a, delta), 0.0, 1.0);
}

Vector Estimator::cost_lcb(const ContextVector &x, ActionId a,
                           double delta) const {
  const Vector c = cost_estimate(x, a);
  return clip((c.array() - cost_epsilon(x, a, delta)).matrix(), -1.0, 1.0);
}

void Estimator::validate_observation(double r, const Vector &c) {
  if (!std::isfinite(r) || !c.allFinite())
    throw ArgumentError("estimator update: non-finite observation");
  if (r < 0.0 || r > 1.0)
    throw ArgumentError("estimator update: reward outside [0,1]");
  if ((c.array().abs() > 1.0).any())
    throw ArgumentError("estimator update: cost outside [-1,1]");
}

// --- OracleEstimator ---------------------------------------------------------

void OracleEstimator::update(const ContextVector &, ActionId, double r,
                             const Vector &c) {
  validate_observation(r, c);
  ++t_;
}

double OracleEstimator::reward_estimate(const ContextVector &x,
                                        ActionId a) const {
  return env_->expected_reward(x, a);
}

Vector OracleEstimator::cost_estimate(const ContextVector &x,
                                      ActionId a) const {
  return env_->expected_cost(x, a);
}

// --- LinearUcbEstimator ------------------------------------------------------

LinearUcbEstimator::LinearUcbEstimator(std::shared_ptr<const FeatureMap> phi,
                                       Index cost_dim, LinearUcbOptions opts,
                                       CostFunction known_costs)
    : phi_(std::move(phi)), cost_dim_(cost_dim), opts_(opts),
      known_costs_(std::move(known_costs)) {
  if (!phi_)
    throw ArgumentError("LinearUcbEstimator: null feature map");
  if (opts_.ridge <= 0.0)
    throw ArgumentError("LinearUcbEstimator: ridge must be positive");
  const Index p = phi_->dim();
  v_ = opts_.ridge * Matrix::Identity(p, p);
  v_inv_ = Matrix::Identity(p, p) / opts_.ridge;
  xty_ = Matrix::Zero(p, 1 + cost_dim_);
  theta_ = Matrix::Zero(p, 1 + cost_dim_);
}

void LinearUcbEstimator::update(const ContextVector &x, ActionId a, double r,
                                const Vector &c) {
  validate_observation(r, c);
  if (c.size() != cost_dim_)
    throw ArgumentError("LinearUcbEstimator: cost dimension mismatch");
  const Vector f = phi_->evaluate(x, a);
  v_.noalias() += f * f.transpose();
  // Sherman-Morrison rank-one update of the inverse.
  const Vector vf = v_inv_ * f;
  v_inv_.noalias() -= (vf * vf.transpose()) / (1.0 + f.dot(vf));
  xty_.col(0) += r * f;
  xty_.rightCols(cost_dim_).noalias() += f * c.transpose();
  ++t_;
  if (opts_.recompute_every > 0 && t_ % opts_.recompute_every == 0)
    v_inv_ = v_.ldlt().solve(Matrix::Identity(v_.rows(), v_.cols()));
  theta_.noalias() = v_inv_ * xty_;
}

double LinearUcbEstimator::inverse_drift() const {
  const Matrix fresh = v_.ldlt().solve(Matrix::Identity(v_.rows(), v_.cols()));
  return (v_inv_ - fresh).norm() / fresh.norm();
}

double LinearUcbEstimator::width(const Vector &phi) const {
  return opts_.c_delta * std::sqrt(std::max(0.0, phi.dot(v_inv_ * phi)));
}

double LinearUcbEstimator::reward_estimate(const ContextVector &x,
                                           ActionId a) const {
  if (t_ == 0)
    return 0.5;
  return phi_->evaluate(x, a).dot(theta_.col(0));
}

Vector LinearUcbEstimator::cost_estimate(const ContextVector &x,
                                         ActionId a) const {
  if (known_costs_)
    return known_costs_(x, a);
  if (t_ == 0)
    return Vector::Zero(cost_dim_);
  return theta_.rightCols(cost_dim_).transpose() * phi_->evaluate(x, a);
}

double LinearUcbEstimator::reward_epsilon(const ContextVector &x, ActionId a,
                                          double) const {
  if (t_ == 0)
    return kNoDataWidth;
  return width(phi_->evaluate(x, a));
}

double LinearUcbEstimator::cost_epsilon(const ContextVector &x, ActionId a,
                                        double delta) const {
  if (known_costs_)
    return 0.0;
  return reward_epsilon(x, a, delta);
}

// --- logistic ------------------------------------------------------------------

double sigmoid(double u, SigmoidConvention conv) {
  if (conv == SigmoidConvention::negated)
    u = -u;
  if (u >= 0.0)
    return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

namespace {

double softplus(double u) {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

double penalized_loglik(const Eigen::Ref<const Matrix> &X,
                        const Eigen::Ref<const Vector> &y, const Vector &mu,
                        double ridge) {
  const Vector z = X * mu;
  double ll = 0.0;
  for (Index i = 0; i < z.size(); ++i)
    ll -= y(i) * softplus(-z(i)) + (1.0 - y(i)) * softplus(z(i));
  return ll - 0.5 * ridge * mu.squaredNorm();
}

constexpr double kGradTol = 1e-8;
constexpr int kMaxIter = 100;
constexpr double kDivergenceNorm = 1e3;
constexpr double kSaturation = 30.0;

enum class NewtonStatus { ok, singular, diverging };

NewtonStatus newton(const Eigen::Ref<const Matrix> &X,
                    const Eigen::Ref<const Vector> &y, double ridge,
                    LogisticFit &fit) {
  const Index p = X.cols();
  const Matrix eye = Matrix::Identity(p, p);
  for (fit.iterations = 0; fit.iterations < kMaxIter; ++fit.iterations) {
    const Vector z = X * fit.mu;
    Vector s(z.size());
    for (Index i = 0; i < z.size(); ++i)
      s(i) = sigmoid(z(i));
    const Vector grad = X.transpose() * (y - s) - ridge * fit.mu;
    fit.grad_norm = grad.norm();
    if (fit.grad_norm <= kGradTol) {
      fit.converged = true;
      // Under separation the gradient vanishes only as the fit saturates.
      if (ridge < kFloorRidge && z.cwiseAbs().maxCoeff() > kSaturation)
        return NewtonStatus::diverging;
      return NewtonStatus::ok;
    }
    const Vector w = (s.array() * (1.0 - s.array())).matrix();
    const Matrix H = X.transpose() * w.asDiagonal() * X + ridge * eye;
    Eigen::LDLT<Matrix> ldlt(H);
    const Vector d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        d.minCoeff() <= 1e-14 * std::max(1.0, d.maxCoeff()))
      return NewtonStatus::singular;
    const Vector step = ldlt.solve(grad);
    if (!step.allFinite())
      return NewtonStatus::singular;

    const double f0 = penalized_loglik(X, y, fit.mu, ridge);
    double scale = 1.0;
    Vector candidate = fit.mu + step;
    while (scale > 1e-10) {
      candidate = fit.mu + scale * step;
      if (penalized_loglik(X, y, candidate, ridge) >=
          f0 - 1e-12 * std::abs(f0))
        break;
      scale *= 0.5;
    }
    fit.mu = candidate;
    if (ridge < kFloorRidge && fit.mu.norm() > kDivergenceNorm)
      return NewtonStatus::diverging;
  }
  return ridge < kFloorRidge ? NewtonStatus::diverging : NewtonStatus::ok;
}

} // namespace

LogisticFit fit_logistic_mle(const Eigen::Ref<const Matrix> &features,
                             const Eigen::Ref<const Vector> &labels,
                             double ridge, const Vector *warm_start) {
  if (features.rows() == 0 || features.rows() != labels.size())
    throw ArgumentError("fit_logistic_mle: empty or mismatched buffer");
  if (ridge < 0.0)
    throw ArgumentError("fit_logistic_mle: negative ridge");
  for (Index i = 0; i < labels.size(); ++i)
    if (labels(i) != 0.0 && labels(i) != 1.0)
      throw ArgumentError("fit_logistic_mle: labels must be 0 or 1");

  const Index p = features.cols();
  const Vector init = (warm_start && warm_start->size() == p &&
                       warm_start->allFinite())
                          ? *warm_start
                          : Vector::Zero(p);
  LogisticFit fit;
  fit.mu = init;
  if (newton(features, labels, ridge, fit) == NewtonStatus::ok)
    return fit;

  // No finite unpenalized optimum: retry with the floor ridge.
  LogisticFit floored;
  floored.mu = init.norm() > kDivergenceNorm ? Vector::Zero(p) : init;
  floored.floored = true;
  newton(features, labels, std::max(ridge, kFloorRidge), floored);
  return floored;
}

double logistic_width(double c_delta, std::size_t t, const Vector &phi,
                      const Matrix &v_inv) {
  const double log_factor =
      1.0 + std::log(static_cast<double>(std::max<std::size_t>(t, 1)));
  return c_delta * log_factor * std::sqrt(std::max(0.0, phi.dot(v_inv * phi)));
}

LogisticUcbEstimator::LogisticUcbEstimator(std::shared_ptr<const FeatureMap> phi,
                                           CostFunction known_costs,
                                           LogisticUcbOptions opts)
    : phi_(std::move(phi)), known_costs_(std::move(known_costs)), opts_(opts) {
  if (!phi_ || !known_costs_)
    throw ArgumentError("LogisticUcbEstimator: feature map and cost function required");
  if (opts_.ridge < 0.0)
    throw ArgumentError("LogisticUcbEstimator: negative ridge");
  const Index p = phi_->dim();
  v_ = opts_.ridge * Matrix::Identity(p, p);
  v_inv_ = Matrix::Identity(p, p) / std::max(opts_.ridge, kFloorRidge);
  mu_ = Vector::Zero(p);
  buffer_x_.resize(64, p);
  buffer_y_.resize(64);
}

void LogisticUcbEstimator::update(const ContextVector &x, ActionId a, double r,
                                  const Vector &c) {
  validate_observation(r, c);
  if (r != 0.0 && r != 1.0)
    throw ArgumentError("LogisticUcbEstimator: rewards must be binary");
  const Vector f = phi_->evaluate(x, a);
  const auto n = static_cast<Index>(t_);
  if (n == buffer_x_.rows()) {
    buffer_x_.conservativeResize(2 * n, Eigen::NoChange);
    buffer_y_.conservativeResize(2 * n);
  }
  buffer_x_.row(n) = f.transpose();
  buffer_y_(n) = r;
  ++t_;

  v_.noalias() += f * f.transpose();
  const Index p = v_.rows();
  const double floor = opts_.ridge < kFloorRidge ? kFloorRidge : 0.0;
  v_inv_ = (v_ + floor * Matrix::Identity(p, p))
               .ldlt()
               .solve(Matrix::Identity(p, p));

  if (t_ <= opts_.refit_all_until || t_ % opts_.refit_every == 0)
    refit();
}

void LogisticUcbEstimator::refit() {
  if (t_ == 0)
    return;
  const auto n = static_cast<Index>(t_);
  const bool neg = opts_.convention == SigmoidConvention::negated;
  // The fit works in the standard convention; negated-link parameters are
  // the opposite vector.
  const Vector warm = neg ? Vector(-mu_) : mu_;
  LogisticFit fit = fit_logistic_mle(buffer_x_.topRows(n), buffer_y_.head(n),
                                     opts_.ridge, &warm);
  if (fit.floored && opts_.ridge == 0.0 && !warned_separation_ && t_ > 200) {
    diag::warn("logistic MLE: no finite unpenalized optimum at t=" +
               std::to_string(t_) + "; using floor ridge 1e-8");
    warned_separation_ = true;
  }
  mu_ = neg ? Vector(-fit.mu) : fit.mu;
  ++refits_;
}

double LogisticUcbEstimator::reward_estimate(const ContextVector &x,
                                             ActionId a) const {
  if (t_ == 0)
    return 0.5;
  return sigmoid(phi_->evaluate(x, a).dot(mu_), opts_.convention);
}

Vector LogisticUcbEstimator::cost_estimate(const ContextVector &x,
                                           ActionId a) const {
  return known_costs_(x, a);
}

double LogisticUcbEstimator::reward_epsilon(const ContextVector &x, ActionId a,
                                            double) const {
  if (t_ == 0)
    return kNoDataWidth;
  return logistic_width(opts_.c_delta, t_, phi_->evaluate(x, a), v_inv_);
}

// --- BetaAccumulator -----------------------------------------------------------

void BetaAccumulator::add(double eps) {
  if (!(eps >= 0.0))
    throw ArgumentError("BetaAccumulator: widths must be nonnegative");
  sum_ += eps;
  ++n_;
}

} // namespace cbwk
