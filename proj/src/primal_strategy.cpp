#include "cbwk/primal_strategy.hpp"

#include "cbwk/dual_strategy.hpp"
#include "cbwk/simplex.hpp"

namespace cbwk {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ArgumentError("delta must lie in (0,1)");
}

} // namespace

double xi(std::size_t t, double delta, std::size_t support_size,
          double xi_constant) {
  check_delta(delta);
  const double n = static_cast<double>(std::max<std::size_t>(t, 1));
  const double v = xi_constant *
                   std::sqrt(static_cast<double>(support_size) *
                             std::log(2.0 / delta) / n);
  return std::min(1.0, v);
}

double xi_sum(std::size_t horizon, double delta, std::size_t support_size,
              double xi_constant) {
  double s = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t)
    s += xi(t - 1, delta, support_size, xi_constant);
  return s;
}

double alpha_prop(double horizon, double delta, Index d) {
  check_delta(delta);
  if (d < 1)
    throw ArgumentError("alpha_prop: dimension must be at least 1");
  if (!(horizon >= 1.0))
    throw ArgumentError("alpha_prop: horizon must be at least 1");
  return std::sqrt(2.0 * horizon *
                   std::log((static_cast<double>(d) + 1.0) / (delta / 4.0)));
}

double alpha_seq(double t, double delta, Index d, double horizon) {
  check_delta(delta);
  if (d < 1)
    throw ArgumentError("alpha_seq: dimension must be at least 1");
  return std::sqrt(2.0 * t *
                   std::log(2.0 * (static_cast<double>(d) + 1.0) * horizon /
                            (delta / 4.0)));
}

std::pair<double, double> delta_bars(double horizon, double alpha, double beta,
                                     double xi_total) {
  if (alpha < 0.0 || beta < 0.0 || xi_total < 0.0 || !(horizon > 0.0))
    throw ArgumentError("delta_bars: inputs must be nonnegative");
  const double base = 2.0 * alpha + beta;
  return {(base + xi_total) / horizon, (base + 2.0 * xi_total) / horizon};
}

// --- EmpiricalContextDistribution ---------------------------------------------

EmpiricalContextDistribution::EmpiricalContextDistribution(
    std::size_t support_size, double xi_constant)
    : counts_(support_size, 0), xi_constant_(xi_constant) {
  if (support_size == 0)
    throw ArgumentError("EmpiricalContextDistribution: empty support");
}

void EmpiricalContextDistribution::observe(std::size_t index) {
  if (index >= counts_.size())
    throw ArgumentError("EmpiricalContextDistribution: context outside support");
  ++counts_[index];
  ++t_;
}

Vector EmpiricalContextDistribution::probabilities() const {
  const auto n = static_cast<Index>(counts_.size());
  if (t_ == 0)
    return Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector p(n);
  for (Index i = 0; i < n; ++i)
    p(i) = static_cast<double>(counts_[static_cast<std::size_t>(i)]) /
           static_cast<double>(t_);
  return p;
}

double EmpiricalContextDistribution::xi(double delta) const {
  return cbwk::xi(t_, delta, counts_.size(), xi_constant_);
}

// --- LP ---------------------------------------------------------------------------

LpPolicySolution solve_constrained_policy(const Vector &weights,
                                          const Matrix &reward,
                                          const std::vector<Matrix> &cost,
                                          const Vector &rhs) {
  const Index nx = reward.rows();
  const Index na = reward.cols();
  const Index d = rhs.size();
  if (nx == 0 || na == 0 || weights.size() != nx ||
      static_cast<Index>(cost.size()) != nx)
    throw ArgumentError("solve_constrained_policy: dimension mismatch");
  for (const Matrix &c : cost)
    if (c.rows() != d || c.cols() != na)
      throw ArgumentError("solve_constrained_policy: cost block mismatch");

  lp::Problem p;
  p.objective.resize(nx * na);
  for (Index x = 0; x < nx; ++x)
    p.objective.segment(x * na, na) = weights(x) * reward.row(x).transpose();
  p.rows.resize(0, nx * na);
  for (Index i = 0; i < d; ++i) {
    Vector row(nx * na);
    for (Index x = 0; x < nx; ++x)
      row.segment(x * na, na) =
          weights(x) * cost[static_cast<std::size_t>(x)].row(i).transpose();
    p.add_row(row, lp::Sense::le, rhs(i));
  }
  for (Index x = 0; x < nx; ++x) {
    Vector row = Vector::Zero(nx * na);
    row.segment(x * na, na).setOnes();
    p.add_row(row, lp::Sense::eq, 1.0);
  }

  const lp::Solution s = lp::solve(p);
  LpPolicySolution out;
  if (s.status != lp::Status::optimal)
    return out;
  out.feasible = true;
  out.objective = s.objective;
  out.policies.reserve(static_cast<std::size_t>(nx));
  for (Index x = 0; x < nx; ++x) {
    Vector probs = s.x.segment(x * na, na).cwiseMax(0.0);
    probs /= probs.sum();
    out.policies.emplace_back(std::move(probs));
  }
  return out;
}

// --- SlackSchedule ---------------------------------------------------------------

SlackSchedule::SlackSchedule(const PrimalConfig &cfg, std::size_t support_size)
    : mode_(cfg.slack), delta_q_(cfg.delta / 4.0),
      horizon_(static_cast<double>(cfg.horizon)), support_size_(support_size),
      xi_constant_(cfg.xi_constant), exact_nu_(cfg.known_weights.has_value()) {
  alpha_ = alpha_prop(horizon_, cfg.delta, cfg.budgets.dim());
  xi_total_ = exact_nu_ ? 0.0
                        : xi_sum(cfg.horizon, delta_q_, support_size_, xi_constant_);
}

double SlackSchedule::slack(std::size_t t, double beta) const {
  if (t == 0)
    throw ArgumentError("SlackSchedule: rounds start at 1");
  const double xi_prev =
      exact_nu_ ? 0.0 : xi(t - 1, delta_q_, support_size_, xi_constant_);
  const auto [bar, bar_prime] = delta_bars(horizon_, alpha_, beta, xi_total_);
  switch (mode_) {
  case SlackMode::soft:
    return xi_prev;
  case SlackMode::hard_null:
    return -bar;
  case SlackMode::hard_general:
    return -bar_prime + xi_prev;
  }
  return 0.0;
}

// --- PrimalStrategy -------------------------------------------------------------

PrimalStrategy::PrimalStrategy(PrimalConfig cfg,
                               std::vector<ContextVector> support)
    : cfg_(std::move(cfg)), support_(std::move(support)),
      nu_hat_(support_.size(), cfg_.xi_constant),
      schedule_(cfg_, support_.size()) {
  if (cfg_.num_actions == 0)
    throw ArgumentError("PrimalStrategy: empty action set");
  if (cfg_.null_action && cfg_.null_action->index >= cfg_.num_actions)
    throw ArgumentError("PrimalStrategy: null action out of range");
  if (cfg_.known_weights &&
      (cfg_.known_weights->size() != static_cast<Index>(support_.size()) ||
       (cfg_.known_weights->array() < 0.0).any() ||
       std::abs(cfg_.known_weights->sum() - 1.0) > 1e-9))
    throw ArgumentError("PrimalStrategy: known weights must be a distribution "
                        "over the support");
}

double PrimalStrategy::beta() const {
  switch (cfg_.beta_source) {
  case BetaSource::theoretical:
    return cfg_.beta_constant * std::sqrt(static_cast<double>(cfg_.horizon)) *
           std::log(static_cast<double>(cfg_.horizon) / (cfg_.delta / 4.0));
  case BetaSource::running:
    return beta_.value();
  case BetaSource::fixed:
    return cfg_.beta_fixed;
  }
  return 0.0;
}

ActionId PrimalStrategy::select(const ContextVector &x, const Estimator &est,
                                Rng &rng) {
  const std::size_t t = nu_hat_.total() + 1;
  const double delta_q = cfg_.delta / 4.0;
  const auto nx = static_cast<Index>(support_.size());
  const auto na = static_cast<Index>(cfg_.num_actions);
  const Index d = cfg_.budgets.dim();

  Matrix reward(nx, na);
  std::vector<Matrix> cost(support_.size());
  for (Index i = 0; i < nx; ++i) {
    Vector ucb;
    Matrix lcb;
    optimistic_bounds(support_[static_cast<std::size_t>(i)], est, delta_q,
                      cfg_.num_actions, d, ucb, lcb);
    reward.row(i) = ucb.transpose();
    cost[static_cast<std::size_t>(i)] = std::move(lcb);
  }
  const Vector rhs =
      cfg_.budgets.values().array() + schedule_.slack(t, beta());
  last_ = solve_constrained_policy(
      cfg_.known_weights ? *cfg_.known_weights : nu_hat_.probabilities(), reward,
      cost, rhs);

  if (!last_.feasible) {
    ++infeasible_;
    if (cfg_.null_action)
      return *cfg_.null_action;
    return PolicyDistribution::uniform(cfg_.num_actions).sample(rng);
  }
  const auto idx = static_cast<std::size_t>(x.coords(0));
  if (idx >= support_.size())
    throw ArgumentError("PrimalStrategy: context outside the declared support");
  return last_.policies[idx].sample(rng);
}

void PrimalStrategy::observe(const RoundObservation &obs, const Estimator &est) {
  beta_.add(est.epsilon(*obs.x, obs.a, cfg_.delta / 4.0));
  nu_hat_.observe(static_cast<std::size_t>(obs.x->coords(0)));
  ++round_;
}

} // namespace cbwk
