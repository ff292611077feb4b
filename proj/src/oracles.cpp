#include "cbwk/oracles.hpp"

#include "cbwk/diagnostics.hpp"
#include "cbwk/dual_strategy.hpp"
#include "cbwk/parallel.hpp"
#include "cbwk/primal_strategy.hpp"
#include "cbwk/simplex.hpp"

#include <cmath>
#include <sstream>

namespace cbwk {

void DualSample::validate() const {
  const Index S = size();
  const Index A = num_actions();
  if (S == 0 || A == 0 || dim() == 0)
    throw ArgumentError("DualSample: empty sample, action set or budget");
  if (reward.rows() != S || static_cast<Index>(cost.size()) != A)
    throw ArgumentError("DualSample: table shape mismatch");
  for (const Matrix &c : cost)
    if (c.rows() != S || c.cols() != dim())
      throw ArgumentError("DualSample: cost block shape mismatch");
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9)
    throw ArgumentError("DualSample: weights must form a distribution");
}

DualSample DualSample::from_tables(const Vector &weights, const Matrix &reward,
                                   const std::vector<Matrix> &cost,
                                   const Vector &budgets) {
  const Index S = reward.rows();
  const Index A = reward.cols();
  const Index d = budgets.size();
  if (static_cast<Index>(cost.size()) != S)
    throw ArgumentError("DualSample::from_tables: context count mismatch");
  DualSample s{weights, reward, std::vector<Matrix>(static_cast<std::size_t>(A)),
               budgets};
  for (Index a = 0; a < A; ++a) {
    Matrix &block = s.cost[static_cast<std::size_t>(a)];
    block.resize(S, d);
    for (Index x = 0; x < S; ++x) {
      const Matrix &cx = cost[static_cast<std::size_t>(x)];
      if (cx.rows() != d || cx.cols() != A)
        throw ArgumentError("DualSample::from_tables: cost block mismatch");
      block.row(x) = cx.col(a).transpose();
    }
  }
  s.validate();
  return s;
}

DualSample DualSample::draw(const Environment &env, const Vector &budgets,
                            Index samples, Rng &rng) {
  if (samples < 1)
    throw ArgumentError("DualSample::draw: need at least one sample");
  if (budgets.size() != env.cost_dim())
    throw ArgumentError("DualSample::draw: budget dimension mismatch");
  const auto A = static_cast<Index>(env.num_actions());
  DualSample s;
  s.weights = Vector::Constant(samples, 1.0 / static_cast<double>(samples));
  s.reward.resize(samples, A);
  s.cost.assign(static_cast<std::size_t>(A), Matrix(samples, budgets.size()));
  s.budgets = budgets;
  for (Index i = 0; i < samples; ++i) {
    const ContextVector x = env.sample_context(rng);
    for (Index a = 0; a < A; ++a) {
      const ActionId id(static_cast<std::size_t>(a));
      s.reward(i, a) = env.expected_reward(x, id);
      s.cost[static_cast<std::size_t>(a)].row(i) =
          env.expected_cost(x, id).transpose();
    }
  }
  return s;
}

double dual_objective(const Vector &lambda, const DualSample &s, Vector *grad) {
  if (lambda.size() != s.dim())
    throw ArgumentError("dual_objective: dimension mismatch");
  if ((lambda.array() < 0.0).any())
    throw ArgumentError("dual_objective: lambda must be nonnegative");
  const Index S = s.size();
  const Index A = s.num_actions();
  // scores(x, a) = r(x,a) - <c(x,a), lambda>; the <B, lambda> shift is common.
  Matrix scores(S, A);
  for (Index a = 0; a < A; ++a)
    scores.col(a) = s.reward.col(a) - s.cost[static_cast<std::size_t>(a)] * lambda;
  Vector best = scores.col(0);
  std::vector<Index> arg(static_cast<std::size_t>(S), 0);
  for (Index a = 1; a < A; ++a)
    for (Index x = 0; x < S; ++x)
      if (scores(x, a) > best(x)) {
        best(x) = scores(x, a);
        arg[static_cast<std::size_t>(x)] = a;
      }
  if (grad) {
    Vector g = s.budgets;
    for (Index x = 0; x < S; ++x)
      g -= s.weights(x) *
           s.cost[static_cast<std::size_t>(arg[static_cast<std::size_t>(x)])]
               .row(x)
               .transpose();
    *grad = std::move(g);
  }
  return s.weights.dot(best) + s.budgets.dot(lambda);
}

double dual_objective(const Vector &lambda, const DualSample &s) {
  return dual_objective(lambda, s, nullptr);
}

Vector dual_subgradient(const Vector &lambda, const DualSample &s) {
  Vector g;
  dual_objective(lambda, s, &g);
  return g;
}

namespace {

struct Cut {
  Vector point;
  double value;
  Vector grad;
};

// Kelley's method on [0, upper]^d. Enlarges the box while the model
// minimizer sits on its upper face.
void kelley_polish(const DualSample &s, const DualMinOptions &opts,
                   std::vector<Cut> cuts, DualMinimum &best) {
  const Index d = s.dim();
  double upper = 2.0 * best.lambda.lpNorm<Eigen::Infinity>() + 1.0;
  for (std::size_t iter = 0; iter < opts.max_cuts; ++iter) {
    // Variables: lambda (d), z+ and z-; maximize z- - z+.
    lp::Problem p;
    p.objective = Vector::Zero(d + 2);
    p.objective(d) = -1.0;
    p.objective(d + 1) = 1.0;
    p.rows.resize(0, d + 2);
    for (const Cut &c : cuts) {
      Vector row(d + 2);
      row.head(d) = c.grad;
      row(d) = -1.0;
      row(d + 1) = 1.0;
      p.add_row(row, lp::Sense::le, c.grad.dot(c.point) - c.value);
    }
    for (Index j = 0; j < d; ++j) {
      Vector row = Vector::Zero(d + 2);
      row(j) = 1.0;
      p.add_row(row, lp::Sense::le, upper);
    }
    const lp::Solution sol = lp::solve(p);
    if (sol.status != lp::Status::optimal)
      return;
    const Vector lam = sol.x.head(d).cwiseMax(0.0);
    const double model = sol.x(d) - sol.x(d + 1);

    Vector g;
    const double value = dual_objective(lam, s, &g);
    if (value < best.value) {
      best.value = value;
      best.lambda = lam;
    }
    const bool on_face = (lam.array() >= upper * (1.0 - 1e-9)).any();
    if (on_face) {
      upper *= 2.0;
    } else if (best.value - model <= opts.tol * std::max(1.0, std::abs(best.value))) {
      best.lower_bound = model;
      best.converged = true;
      return;
    }
    cuts.push_back({lam, value, std::move(g)});
  }
}

} // namespace

DualMinimum minimize_dual(const DualSample &s, const DualMinOptions &opts) {
  s.validate();
  if (opts.iters < 1)
    throw ArgumentError("minimize_dual: need at least one iteration");
  const Index d = s.dim();
  const double eta0 =
      opts.eta0 > 0.0 ? opts.eta0 : 1.0 / std::sqrt(static_cast<double>(d));

  DualMinimum best;
  Vector lam = Vector::Zero(d);
  Vector avg = Vector::Zero(d);
  std::size_t averaged = 0;
  const std::size_t tail_start = opts.iters / 2;
  std::vector<Cut> cuts;
  const std::size_t keep_every = std::max<std::size_t>(1, opts.iters / 20);

  Vector g;
  best.value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= opts.iters; ++k) {
    const double value = dual_objective(lam, s, &g);
    if (value < best.value) {
      best.value = value;
      best.lambda = lam;
    }
    if (k % keep_every == 0)
      cuts.push_back({lam, value, g});
    lam = (lam - eta0 / std::sqrt(static_cast<double>(k)) * g).cwiseMax(0.0);
    if (k > tail_start) {
      avg += lam;
      ++averaged;
    }
  }
  avg /= static_cast<double>(std::max<std::size_t>(averaged, 1));
  const double avg_value = dual_objective(avg, s, &g);
  cuts.push_back({avg, avg_value, g});
  if (avg_value < best.value) {
    best.value = avg_value;
    best.lambda = avg;
  }

  if (opts.polish)
    kelley_polish(s, opts, std::move(cuts), best);

  const double norm = best.lambda.norm();
  const double min_b = s.budgets.minCoeff();
  if (min_b > 0.0 && norm > 10.0 / min_b) {
    std::ostringstream msg;
    msg << "minimize_dual: ||lambda|| = " << norm << " exceeds 10 / min B";
    diag::warn(msg.str());
  }
  return best;
}

OptEstimate estimate_opt(const Environment &env, const Vector &budgets,
                         Index samples, std::size_t reps, std::uint64_t seed,
                         const DualMinOptions &opts) {
  if (samples < 1 || reps < 1)
    throw ArgumentError("estimate_opt: S and J must be at least 1");
  std::vector<DualMinimum> results(reps);
  parallel_for(reps, [&](std::size_t j) {
    Rng rng(seed + j);
    const DualSample s = DualSample::draw(env, budgets, samples, rng);
    results[j] = minimize_dual(s, opts);
  });

  OptEstimate out;
  out.reps = reps;
  Vector lam_sum = Vector::Zero(budgets.size());
  double sum = 0.0;
  for (const DualMinimum &m : results) {
    sum += m.value;
    lam_sum += m.lambda;
    out.converged_reps += m.converged ? 1 : 0;
  }
  const double J = static_cast<double>(reps);
  out.value = sum / J;
  if (reps > 1) {
    double ss = 0.0;
    for (const DualMinimum &m : results)
      ss += (m.value - out.value) * (m.value - out.value);
    out.std_error = std::sqrt(ss / (J - 1.0) / J);
  }
  out.lambda_star = DualVector(lam_sum / J);
  return out;
}

std::optional<double> brute_force_opt(const DualSample &s) {
  s.validate();
  const Index S = s.size();
  const Index A = s.num_actions();
  std::vector<Matrix> cost(static_cast<std::size_t>(S), Matrix(s.dim(), A));
  for (Index x = 0; x < S; ++x)
    for (Index a = 0; a < A; ++a)
      cost[static_cast<std::size_t>(x)].col(a) =
          s.cost[static_cast<std::size_t>(a)].row(x).transpose();
  const LpPolicySolution sol =
      solve_constrained_policy(s.weights, s.reward, cost, s.budgets);
  if (!sol.feasible)
    return std::nullopt;
  return sol.objective;
}

namespace {

DualSample with_budgets(const DualSample &s, Vector budgets) {
  DualSample out = s;
  out.budgets = std::move(budgets);
  return out;
}

double required_opt(const DualSample &s, const char *what) {
  const auto v = brute_force_opt(s);
  if (!v)
    throw ArgumentError(std::string(what) + ": problem infeasible");
  return *v;
}

} // namespace

BoundCheck lambda_norm_bound_check(const DualSample &s, double b,
                                   const Vector &b_tilde) {
  s.validate();
  const double min_b = s.budgets.minCoeff();
  if (!(b >= 0.0 && b < min_b))
    throw ArgumentError("lambda_norm_bound_check: need 0 <= b < min B");
  const Vector shifted = s.budgets.array() - b;
  if (b_tilde.size() != s.dim() || (b_tilde.array() < 0.0).any() ||
      (b_tilde.array() >= shifted.array()).any())
    throw ArgumentError("lambda_norm_bound_check: need 0 <= Bt < B - b1");

  const DualSample at_shifted = with_budgets(s, shifted);
  const double opt_shifted = required_opt(at_shifted, "lambda_norm_bound_check");
  const double opt_tilde =
      required_opt(with_budgets(s, b_tilde), "lambda_norm_bound_check");

  BoundCheck out;
  out.lhs = minimize_dual(at_shifted).lambda.norm();
  out.rhs = (opt_shifted - opt_tilde) / (shifted - b_tilde).minCoeff();
  out.holds = out.lhs <= out.rhs + 1e-6;
  return out;
}

BoundCheck null_action_bound_check(const DualSample &s, double b) {
  s.validate();
  bool has_null = false;
  for (const Matrix &c : s.cost)
    has_null = has_null || c.isZero(0.0);
  if (!has_null)
    throw ArgumentError("null_action_bound_check: no null-cost action");
  const double min_b = s.budgets.minCoeff();
  if (!(min_b > 0.0 && b >= 0.0 && b <= min_b / 2.0))
    throw ArgumentError("null_action_bound_check: need 0 <= b <= min B / 2");

  const DualSample at_shifted = with_budgets(s, s.budgets.array() - b);
  const double opt_b = required_opt(s, "null_action_bound_check");
  const double opt_0 = required_opt(with_budgets(s, Vector::Zero(s.dim())),
                                    "null_action_bound_check");
  BoundCheck out;
  out.lhs = minimize_dual(at_shifted).lambda.norm();
  out.rhs = 2.0 * (opt_b - opt_0) / min_b;
  out.holds = out.lhs <= out.rhs + 1e-6;
  return out;
}

// --- strategies ---------------------------------------------------------------

MixedPolicyStrategy::MixedPolicyStrategy(DualVector lambda, Vector target,
                                         std::size_t num_actions, double delta)
    : lambda_(std::move(lambda)), target_(std::move(target)),
      num_actions_(num_actions), delta_(delta) {
  if (lambda_.dim() != target_.size())
    throw ArgumentError("MixedPolicyStrategy: dimension mismatch");
  if (num_actions_ == 0)
    throw ArgumentError("MixedPolicyStrategy: empty action set");
}

ActionId MixedPolicyStrategy::select(const ContextVector &x,
                                     const Estimator &est, Rng &) {
  Vector ucb;
  Matrix lcb;
  optimistic_bounds(x, est, delta_, num_actions_, target_.size(), ucb, lcb);
  return select_action(ucb, lcb, target_, lambda_);
}

StaticPolicyStrategy::StaticPolicyStrategy(
    std::vector<PolicyDistribution> policies)
    : policies_(std::move(policies)) {
  if (policies_.empty())
    throw ArgumentError("StaticPolicyStrategy: no policies");
}

ActionId StaticPolicyStrategy::select(const ContextVector &x, const Estimator &,
                                      Rng &rng) {
  if (x.coords.size() != 1)
    throw ArgumentError("StaticPolicyStrategy: expected a finite context");
  const auto i = static_cast<std::size_t>(x.coords(0));
  if (i >= policies_.size())
    throw ArgumentError("StaticPolicyStrategy: context outside support");
  return policies_[i].sample(rng);
}

} // namespace cbwk
