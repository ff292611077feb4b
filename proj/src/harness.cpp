#include "cbwk/harness.hpp"

#include "cbwk/diagnostics.hpp"
#include "cbwk/fairness.hpp"
#include "cbwk/oracles.hpp"
#include "cbwk/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace cbwk {

using nlohmann::json;

// --- config -------------------------------------------------------------------

namespace {

void check_keys(const json &j, const std::set<std::string> &allowed,
                const std::string &where) {
  if (!j.is_object())
    throw ConfigError(where + ": expected an object");
  for (const auto &item : j.items())
    if (!allowed.count(item.key()))
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

template <typename T>
T get_or(const json &j, const char *key, T fallback) {
  if (!j.contains(key))
    return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

Vector to_vector(const json &j, const std::string &what) {
  if (!j.is_array())
    throw ConfigError(what + ": expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw ConfigError(what + ": expected numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix to_matrix(const json &j, const std::string &what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(what + ": expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector row = to_vector(j[i], what);
    if (static_cast<std::size_t>(row.size()) != cols)
      throw ConfigError(what + ": ragged rows");
    m.row(static_cast<Index>(i)) = row.transpose();
  }
  return m;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string &text, const std::string &what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError(what + ": " + e.what());
  }
}

FiniteInstance instance_from_json(const json &j) {
  check_keys(j,
             {"weights", "reward", "cost", "budgets", "cost_noise",
              "null_action", "spend_mask"},
             "instance");
  for (const char *key : {"weights", "reward", "cost", "budgets"})
    if (!j.contains(key))
      throw ConfigError(std::string("instance: missing '") + key + "'");
  FiniteInstance inst;
  inst.weights = to_vector(j["weights"], "instance.weights");
  inst.reward = to_matrix(j["reward"], "instance.reward");
  if (!j["cost"].is_array())
    throw ConfigError("instance.cost: expected one matrix per context");
  for (const json &c : j["cost"])
    inst.cost.push_back(to_matrix(c, "instance.cost"));
  inst.budgets = to_vector(j["budgets"], "instance.budgets");
  const std::string noise = get_or<std::string>(j, "cost_noise", "none");
  if (noise == "none")
    inst.noise = FiniteEnvironment::CostNoise::none;
  else if (noise == "bernoulli")
    inst.noise = FiniteEnvironment::CostNoise::bernoulli;
  else if (noise == "rademacher")
    inst.noise = FiniteEnvironment::CostNoise::rademacher;
  else
    throw ConfigError("instance.cost_noise: expected none, bernoulli or rademacher");
  if (j.contains("null_action"))
    inst.null_action = ActionId(j["null_action"].get<std::size_t>());
  if (j.contains("spend_mask"))
    inst.spend_mask = to_vector(j["spend_mask"], "instance.spend_mask");
  if (inst.spend_mask.size() != 0 && inst.spend_mask.size() != inst.budgets.size())
    throw ConfigError("instance.spend_mask: dimension mismatch");
  return inst;
}

} // namespace

FiniteInstance parse_instance(const std::string &text) {
  return instance_from_json(parse_json(text, "instance"));
}

void ExperimentConfig::validate() const {
  if (horizon < 1)
    throw ConfigError("horizon must be at least 1");
  if (warmup > horizon)
    throw ConfigError("warmup must not exceed horizon");
  if (seeds < 1)
    throw ConfigError("seeds must be at least 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("delta must lie in (0,1)");
  if (margin_b < 0.0)
    throw ConfigError("margin b must be nonnegative");
  if (env.kind == EnvSpec::Kind::finite && !env.instance)
    throw ConfigError("finite environment needs an instance");
  if (env.kind == EnvSpec::Kind::court && !(env.tau >= 0.0 && env.tau <= 1.0))
    throw ConfigError("tau must lie in [0,1]");
  const bool finite_only = strategy.kind == StrategySpec::Kind::primal ||
                           strategy.kind == StrategySpec::Kind::oracle_static;
  if (finite_only && env.kind != EnvSpec::Kind::finite)
    throw ConfigError("primal and oracle_static strategies need a finite "
                      "context set");
  if (estimator.kind == EstimatorSpec::Kind::logistic &&
      env.kind != EnvSpec::Kind::court)
    throw ConfigError("the logistic estimator is only wired for the court "
                      "environment");
  if (strategy.kind == StrategySpec::Kind::pgd_fixed && !(strategy.gamma > 0.0))
    throw ConfigError("gamma must be positive");
}

ExperimentConfig parse_config(const std::string &text,
                              const std::filesystem::path &base_dir) {
  const json j = parse_json(text, "config");
  check_keys(j,
             {"label", "env", "strategy", "estimator", "horizon", "warmup",
              "seeds", "base_seed", "delta", "margin", "include_warmup",
              "threads"},
             "config");
  ExperimentConfig cfg;
  cfg.label = get_or<std::string>(j, "label", "");

  if (!j.contains("env"))
    throw ConfigError("config: missing 'env'");
  const json &env = j["env"];
  check_keys(env, {"type", "tau", "sigmoid", "instance"}, "env");
  const std::string env_type = get_or<std::string>(env, "type", "court");
  if (env_type == "court") {
    cfg.env.kind = EnvSpec::Kind::court;
    cfg.env.tau = get_or<double>(env, "tau", 1e-7);
    const std::string sig = get_or<std::string>(env, "sigmoid", "standard");
    if (sig == "standard")
      cfg.env.sigmoid = SigmoidConvention::standard;
    else if (sig == "negated")
      cfg.env.sigmoid = SigmoidConvention::negated;
    else
      throw ConfigError("env.sigmoid: expected standard or negated");
  } else if (env_type == "finite") {
    cfg.env.kind = EnvSpec::Kind::finite;
    if (!env.contains("instance"))
      throw ConfigError("env: finite environment needs 'instance'");
    const json &inst = env["instance"];
    if (inst.is_string()) {
      std::filesystem::path p = inst.get<std::string>();
      if (p.is_relative())
        p = base_dir / p;
      cfg.env.instance = parse_instance(read_file(p));
    } else {
      cfg.env.instance = instance_from_json(inst);
    }
  } else {
    throw ConfigError("env.type: expected court or finite");
  }

  if (!j.contains("strategy"))
    throw ConfigError("config: missing 'strategy'");
  const json &st = j["strategy"];
  check_keys(st,
             {"type", "gamma", "threshold", "c", "beta_constant",
              "margin_auto", "slack", "beta", "beta_fixed", "exact_nu", "lambda",
              "opt_samples", "opt_reps", "opt_seed"},
             "strategy");
  const std::string st_type = get_or<std::string>(st, "type", "");
  StrategySpec &s = cfg.strategy;
  if (st_type == "pgd_fixed")
    s.kind = StrategySpec::Kind::pgd_fixed;
  else if (st_type == "pgd_adaptive")
    s.kind = StrategySpec::Kind::pgd_adaptive;
  else if (st_type == "primal")
    s.kind = StrategySpec::Kind::primal;
  else if (st_type == "mixed")
    s.kind = StrategySpec::Kind::mixed;
  else if (st_type == "oracle_static")
    s.kind = StrategySpec::Kind::oracle_static;
  else
    throw ConfigError("strategy.type: expected pgd_fixed, pgd_adaptive, "
                      "primal, mixed or oracle_static");
  s.gamma = get_or<double>(st, "gamma", s.gamma);
  const std::string threshold = get_or<std::string>(st, "threshold", "practical");
  if (threshold == "practical")
    s.threshold_mode = ThresholdMode::practical;
  else if (threshold == "theoretical")
    s.threshold_mode = ThresholdMode::theoretical;
  else
    throw ConfigError("strategy.threshold: expected practical or theoretical");
  s.practical_c = get_or<double>(st, "c", s.practical_c);
  s.beta_constant = get_or<double>(st, "beta_constant", s.beta_constant);
  s.margin_auto = get_or<bool>(st, "margin_auto", s.margin_auto);
  const std::string slack = get_or<std::string>(st, "slack", "soft");
  if (slack == "soft")
    s.slack = SlackMode::soft;
  else if (slack == "hard_null")
    s.slack = SlackMode::hard_null;
  else if (slack == "hard_general")
    s.slack = SlackMode::hard_general;
  else
    throw ConfigError("strategy.slack: expected soft, hard_null or hard_general");
  const std::string beta = get_or<std::string>(st, "beta", "running");
  if (beta == "running")
    s.beta_source = BetaSource::running;
  else if (beta == "theoretical")
    s.beta_source = BetaSource::theoretical;
  else if (beta == "fixed")
    s.beta_source = BetaSource::fixed;
  else
    throw ConfigError("strategy.beta: expected running, theoretical or fixed");
  s.beta_fixed = get_or<double>(st, "beta_fixed", s.beta_fixed);
  s.exact_nu = get_or<bool>(st, "exact_nu", s.exact_nu);
  if (st.contains("lambda"))
    s.lambda = to_vector(st["lambda"], "strategy.lambda");
  s.opt_samples = get_or<Index>(st, "opt_samples", s.opt_samples);
  s.opt_reps = get_or<std::size_t>(st, "opt_reps", s.opt_reps);
  s.opt_seed = get_or<std::uint64_t>(st, "opt_seed", s.opt_seed);

  if (j.contains("estimator")) {
    const json &est = j["estimator"];
    check_keys(est, {"type", "c_delta", "ridge"}, "estimator");
    const std::string et = get_or<std::string>(est, "type", "logistic");
    if (et == "oracle")
      cfg.estimator.kind = EstimatorSpec::Kind::oracle;
    else if (et == "linear")
      cfg.estimator.kind = EstimatorSpec::Kind::linear;
    else if (et == "logistic")
      cfg.estimator.kind = EstimatorSpec::Kind::logistic;
    else
      throw ConfigError("estimator.type: expected oracle, linear or logistic");
    if (est.contains("c_delta"))
      cfg.estimator.c_delta = get_or<double>(est, "c_delta", 0.0);
    if (est.contains("ridge"))
      cfg.estimator.ridge = get_or<double>(est, "ridge", 0.0);
  } else if (cfg.env.kind == EnvSpec::Kind::finite) {
    cfg.estimator.kind = EstimatorSpec::Kind::linear;
  }

  cfg.horizon = get_or<std::size_t>(j, "horizon", cfg.horizon);
  cfg.warmup = get_or<std::size_t>(j, "warmup", cfg.warmup);
  cfg.seeds = get_or<std::size_t>(j, "seeds", cfg.seeds);
  cfg.base_seed = get_or<std::uint64_t>(j, "base_seed", cfg.base_seed);
  cfg.delta = get_or<double>(j, "delta", cfg.delta);
  if (j.contains("margin")) {
    const json &m = j["margin"];
    check_keys(m, {"convention", "b"}, "margin");
    const std::string conv = get_or<std::string>(m, "convention", "spend");
    if (conv == "spend")
      cfg.margin_convention = MarginConvention::spend;
    else if (conv == "all")
      cfg.margin_convention = MarginConvention::all;
    else
      throw ConfigError("margin.convention: expected spend or all");
    cfg.margin_b = get_or<double>(m, "b", cfg.margin_b);
  }
  cfg.include_warmup = get_or<bool>(j, "include_warmup", cfg.include_warmup);
  cfg.threads = get_or<std::size_t>(j, "threads", cfg.threads);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  return parse_config(read_file(path), path.parent_path());
}

// --- Experiment -------------------------------------------------------------

Experiment::Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (is_court()) {
    auto court = std::make_shared<CourtEnvironment>(cfg_.env.tau, cfg_.env.sigmoid);
    budgets_ = court->budgets();
    margin_mask_ = cfg_.margin_convention == MarginConvention::spend
                       ? CourtEnvironment::spend_mask()
                       : Vector::Ones(CourtEnvironment::kCostDim);
    env_ = std::move(court);
  } else {
    const FiniteInstance &inst = *cfg_.env.instance;
    env_ = std::make_shared<FiniteEnvironment>(inst.weights, inst.reward,
                                               inst.cost, inst.noise);
    budgets_ = BudgetVector(inst.budgets);
    if (env_->cost_dim() != budgets_.dim())
      throw ConfigError("instance: budget dimension mismatch");
    margin_mask_ = (cfg_.margin_convention == MarginConvention::spend &&
                    inst.spend_mask.size() != 0)
                       ? inst.spend_mask
                       : Vector::Ones(budgets_.dim());
    if (inst.null_action && inst.null_action->index >= env_->num_actions())
      throw ConfigError("instance: null action out of range");
  }

  const StrategySpec &s = cfg_.strategy;
  if (s.kind == StrategySpec::Kind::pgd_adaptive && s.margin_auto) {
    AdaptiveConfig ac;
    ac.delta = cfg_.delta;
    ac.horizon = cfg_.horizon;
    ac.dim = budgets_.dim();
    ac.threshold_mode = s.threshold_mode;
    ac.practical_c = s.practical_c;
    ac.beta_constant = s.beta_constant;
    ac.margin_auto = true;
    margin_ = adaptive_margin(ac);
    margin_mask_ = Vector::Ones(budgets_.dim());
  } else if (s.kind == StrategySpec::Kind::primal) {
    margin_ = Vector::Zero(budgets_.dim());
  } else {
    margin_ = cfg_.margin_b * margin_mask_;
  }
  target_ = budgets_.values() - margin_;

  if (s.kind == StrategySpec::Kind::mixed) {
    if (s.lambda) {
      if (s.lambda->size() != budgets_.dim())
        throw ConfigError("strategy.lambda: dimension mismatch");
      mixed_lambda_ = DualVector(*s.lambda).values();
    } else if (is_court()) {
      mixed_lambda_ = estimate_opt(*env_, target_, s.opt_samples, s.opt_reps,
                                   s.opt_seed)
                          .lambda_star.values();
    } else {
      const FiniteInstance &inst = *cfg_.env.instance;
      mixed_lambda_ =
          minimize_dual(DualSample::from_tables(inst.weights, inst.reward,
                                                inst.cost, target_))
              .lambda;
    }
  }
  if (s.kind == StrategySpec::Kind::oracle_static) {
    const FiniteInstance &inst = *cfg_.env.instance;
    LpPolicySolution sol =
        solve_constrained_policy(inst.weights, inst.reward, inst.cost, target_);
    if (!sol.feasible)
      throw ConfigError("oracle_static: the static program is infeasible");
    static_policies_ = std::move(sol.policies);
  }
}

std::unique_ptr<Estimator> Experiment::make_estimator() const {
  const EstimatorSpec &e = cfg_.estimator;
  switch (e.kind) {
  case EstimatorSpec::Kind::oracle:
    return std::make_unique<OracleEstimator>(*env_);
  case EstimatorSpec::Kind::linear: {
    LinearUcbOptions opts;
    opts.c_delta = e.c_delta.value_or(1.0);
    opts.ridge = e.ridge.value_or(1.0);
    if (is_court())
      return std::make_unique<LinearUcbEstimator>(
          std::make_shared<CourtFeatureMap>(), budgets_.dim(), opts,
          CostFunction(court_cost));
    const auto &fin = static_cast<const FiniteEnvironment &>(*env_);
    return std::make_unique<LinearUcbEstimator>(
        std::make_shared<TabularFeatureMap>(fin.num_contexts(),
                                            fin.num_actions()),
        budgets_.dim(), opts);
  }
  case EstimatorSpec::Kind::logistic: {
    LogisticUcbOptions opts;
    opts.c_delta = e.c_delta.value_or(0.025);
    opts.ridge = e.ridge.value_or(0.0);
    opts.convention = cfg_.env.sigmoid;
    return std::make_unique<LogisticUcbEstimator>(
        std::make_shared<CourtFeatureMap>(), CostFunction(court_cost), opts);
  }
  }
  throw ConfigError("unknown estimator");
}

std::unique_ptr<Strategy> Experiment::make_strategy() const {
  const StrategySpec &s = cfg_.strategy;
  const std::size_t A = env_->num_actions();
  switch (s.kind) {
  case StrategySpec::Kind::pgd_fixed: {
    PgdConfig pc;
    pc.num_actions = A;
    pc.gamma = s.gamma;
    pc.delta = cfg_.delta;
    pc.horizon = cfg_.horizon;
    pc.budgets = budgets_;
    pc.margin = margin_;
    return std::make_unique<PgdStrategy>(std::move(pc));
  }
  case StrategySpec::Kind::pgd_adaptive: {
    AdaptiveConfig ac;
    ac.delta = cfg_.delta;
    ac.horizon = cfg_.horizon;
    ac.dim = budgets_.dim();
    ac.threshold_mode = s.threshold_mode;
    ac.practical_c = s.practical_c;
    ac.beta_constant = s.beta_constant;
    ac.margin_auto = s.margin_auto;
    ac.margin_b = cfg_.margin_b;
    ac.margin_mask = margin_mask_;
    return std::make_unique<AdaptivePgdStrategy>(std::move(ac), budgets_, A);
  }
  case StrategySpec::Kind::primal: {
    const auto &fin = static_cast<const FiniteEnvironment &>(*env_);
    PrimalConfig pc;
    pc.delta = cfg_.delta;
    pc.horizon = cfg_.horizon;
    pc.slack = s.slack;
    pc.beta_source = s.beta_source;
    pc.beta_constant = s.beta_constant;
    pc.beta_fixed = s.beta_fixed;
    pc.budgets = budgets_;
    pc.num_actions = A;
    pc.null_action = cfg_.env.instance->null_action;
    if (s.exact_nu)
      pc.known_weights = cfg_.env.instance->weights;
    return std::make_unique<PrimalStrategy>(std::move(pc), fin.support());
  }
  case StrategySpec::Kind::mixed:
    return std::make_unique<MixedPolicyStrategy>(DualVector(mixed_lambda_),
                                                 target_, A, cfg_.delta);
  case StrategySpec::Kind::oracle_static:
    return std::make_unique<StaticPolicyStrategy>(static_policies_);
  }
  throw ConfigError("unknown strategy");
}

// --- runs ---------------------------------------------------------------------

Trajectory run_single(const Experiment &exp, std::uint64_t seed) {
  const ExperimentConfig &cfg = exp.config();
  const Environment &env = exp.environment();
  Rng rng(seed);
  std::unique_ptr<Estimator> est = exp.make_estimator();
  std::unique_ptr<Strategy> strategy = exp.make_strategy();
  std::uniform_int_distribution<std::size_t> uniform_action(
      0, env.num_actions() - 1);

  Trajectory traj(env.cost_dim());
  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    RoundRecord rec;
    rec.t = t;
    rec.x = env.sample_context(rng);
    rec.warmup = t <= cfg.warmup;
    rec.lambda_before = strategy->lambda();
    rec.regime = strategy->regime();
    rec.a = rec.warmup ? ActionId(uniform_action(rng))
                       : strategy->select(rec.x, *est, rng);
    rec.r = env.sample_reward(rec.x, rec.a, rng);
    rec.c = env.sample_cost(rec.x, rec.a, rng);

    RoundObservation obs{t, &rec.x, rec.a, rec.r, &rec.c, rec.warmup};
    strategy->observe(obs, *est);
    est->update(rec.x, rec.a, rec.r, rec.c);
    traj.append(std::move(rec));
  }
  return traj;
}

Trajectory run_single(const ExperimentConfig &cfg, std::uint64_t seed) {
  return run_single(Experiment(cfg), seed);
}

namespace {

// Mean absolute running average over the first fairness series.
double court_fairness(const Eigen::Ref<const Vector> &avg_cost) {
  return avg_cost.segment(2, 4).cwiseAbs().mean();
}

} // namespace

RunSeries running_averages(const Trajectory &traj, bool include_warmup,
                           bool court) {
  const auto &recs = traj.records();
  std::size_t first = 0;
  if (!include_warmup)
    while (first < recs.size() && recs[first].warmup)
      ++first;
  const auto n = static_cast<Index>(recs.size() - first);
  const Index d = recs.empty() ? 0 : recs.front().c.size();

  RunSeries out;
  out.t.reserve(static_cast<std::size_t>(n));
  out.avg_reward.resize(n);
  out.avg_cost.resize(n, d);
  if (court)
    out.fairness.resize(n);
  double r_sum = 0.0;
  Vector c_sum = Vector::Zero(d);
  for (Index i = 0; i < n; ++i) {
    const RoundRecord &rec = recs[first + static_cast<std::size_t>(i)];
    r_sum += rec.r;
    c_sum += rec.c;
    const double count = static_cast<double>(i + 1);
    out.t.push_back(rec.t);
    out.avg_reward(i) = r_sum / count;
    out.avg_cost.row(i) = (c_sum / count).transpose();
    if (court)
      out.fairness(i) = court_fairness(out.avg_cost.row(i).transpose());
  }
  return out;
}

AggregateSeries aggregate(const std::vector<RunSeries> &runs, bool court) {
  AggregateSeries out;
  out.court = court;
  if (runs.empty())
    return out;
  const RunSeries &ref = runs.front();
  const auto n = static_cast<Index>(ref.t.size());
  const Index d = ref.avg_cost.cols();
  for (const RunSeries &r : runs)
    if (r.t != ref.t || r.avg_cost.cols() != d)
      throw ArgumentError("aggregate: runs have different shapes");
  const double N = static_cast<double>(runs.size());
  out.t = ref.t;

  auto mean_se = [&](auto &&get, Index rows, Index cols, Matrix &mean,
                     Matrix &se) {
    mean = Matrix::Zero(rows, cols);
    se = Matrix::Zero(rows, cols);
    for (const RunSeries &r : runs)
      mean += get(r);
    mean /= N;
    if (runs.size() < 2)
      return;
    for (const RunSeries &r : runs)
      se.array() += (get(r) - mean).array().square();
    se = (se.array() / (N - 1.0) / N).sqrt().matrix();
  };

  Matrix m, s;
  mean_se([](const RunSeries &r) -> Matrix { return r.avg_reward; }, n, 1, m, s);
  out.reward_mean = m.col(0);
  out.reward_se = s.col(0);
  mean_se([](const RunSeries &r) -> Matrix { return r.avg_cost; }, n, d,
          out.cost_mean, out.cost_se);
  if (court) {
    mean_se([](const RunSeries &r) -> Matrix { return r.fairness; }, n, 1, m, s);
    out.fairness_mean = m.col(0);
    out.fairness_se = s.col(0);
  }
  return out;
}

BatchResult run_batch(const ExperimentConfig &cfg) {
  const Experiment exp(cfg);
  const bool court = exp.is_court();
  const std::size_t N = cfg.seeds;
  std::vector<RunSeries> series(N);
  std::vector<Vector> cum_costs(N);
  std::vector<int> max_regime(N, 0);

  parallel_for(
      N,
      [&](std::size_t i) {
        const Trajectory traj = run_single(exp, cfg.base_seed + i);
        series[i] = running_averages(traj, cfg.include_warmup, court);
        cum_costs[i] = traj.cum_cost();
        for (const RoundRecord &rec : traj.records())
          max_regime[i] = std::max(max_regime[i], rec.regime);
      },
      cfg.threads);

  BatchResult out;
  out.series = aggregate(series, court);
  out.cum_costs = cum_costs;

  SummaryRow &row = out.summary;
  row.label = cfg.label;
  row.horizon = cfg.horizon;
  row.runs = N;
  row.max_regime = max_regime;
  const double T = static_cast<double>(cfg.horizon);
  std::size_t ok_target = 0;
  std::size_t ok_budget = 0;
  for (const Vector &c : cum_costs) {
    const Vector slack_target = T * exp.target() - c;
    const Vector slack_budget = T * exp.budgets().values() - c;
    bool target_ok = true;
    for (Index k = 0; k < c.size(); ++k)
      if (exp.margin_mask()(k) != 0.0 && slack_target(k) < 0.0)
        target_ok = false;
    ok_target += target_ok ? 1 : 0;
    ok_budget += (slack_budget.array() >= 0.0).all() ? 1 : 0;
  }
  row.within_target = static_cast<double>(ok_target) / static_cast<double>(N);
  row.within_budget = static_cast<double>(ok_budget) / static_cast<double>(N);

  const AggregateSeries &s = out.series;
  if (s.size() > 0) {
    const Index last = static_cast<Index>(s.size()) - 1;
    row.reward = s.reward_mean(last);
    row.reward_2se = 2.0 * s.reward_se(last);
    row.cost = s.cost_mean.row(last).transpose();
    row.cost_2se = 2.0 * s.cost_se.row(last).transpose();
    if (court) {
      row.ride = row.cost(0);
      row.ride_2se = row.cost_2se(0);
      row.voucher = row.cost(1);
      row.voucher_2se = row.cost_2se(1);
      row.fairness = s.fairness_mean(last);
      row.fairness_2se = 2.0 * s.fairness_se(last);
    }
  }
  return out;
}

// --- output -------------------------------------------------------------------

namespace {

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double round6(double v) { return std::stod(fmt6(v)); }

json vector_json(const Vector &v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i)
    out.push_back(round6(v(i)));
  return out;
}

std::ofstream open_output(const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  return out;
}

} // namespace

void emit_csv(const AggregateSeries &s, std::ostream &out) {
  const Index d = s.cost_mean.cols();
  if (s.court) {
    out << "t,avg_reward_mean,avg_reward_se,ride_cost_mean,ride_cost_se,"
           "voucher_cost_mean,voucher_cost_se,fairness_mean,fairness_se\n";
  } else {
    out << "t,avg_reward_mean,avg_reward_se";
    for (Index k = 0; k < d; ++k)
      out << ",cost" << k << "_mean,cost" << k << "_se";
    out << '\n';
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto r = static_cast<Index>(i);
    out << s.t[i] << ',' << fmt6(s.reward_mean(r)) << ',' << fmt6(s.reward_se(r));
    if (s.court) {
      out << ',' << fmt6(s.cost_mean(r, 0)) << ',' << fmt6(s.cost_se(r, 0))
          << ',' << fmt6(s.cost_mean(r, 1)) << ',' << fmt6(s.cost_se(r, 1))
          << ',' << fmt6(s.fairness_mean(r)) << ',' << fmt6(s.fairness_se(r));
    } else {
      for (Index k = 0; k < d; ++k)
        out << ',' << fmt6(s.cost_mean(r, k)) << ',' << fmt6(s.cost_se(r, k));
    }
    out << '\n';
  }
}

void emit_csv(const AggregateSeries &series, const std::filesystem::path &path) {
  std::ofstream out = open_output(path);
  emit_csv(series, out);
  if (!out)
    throw std::runtime_error("write failed: " + path.string());
}

void emit_summary_json(const std::vector<SummaryRow> &rows, std::ostream &out) {
  json arr = json::array();
  for (const SummaryRow &r : rows) {
    json j;
    j["label"] = r.label;
    j["horizon"] = r.horizon;
    j["runs"] = r.runs;
    j["avg_reward"] = round6(r.reward);
    j["avg_reward_2se"] = round6(r.reward_2se);
    j["cost"] = vector_json(r.cost);
    j["cost_2se"] = vector_json(r.cost_2se);
    j["ride_cost"] = round6(r.ride);
    j["ride_cost_2se"] = round6(r.ride_2se);
    j["voucher_cost"] = round6(r.voucher);
    j["voucher_cost_2se"] = round6(r.voucher_2se);
    j["fairness_cost"] = round6(r.fairness);
    j["fairness_cost_2se"] = round6(r.fairness_2se);
    j["max_regime"] = r.max_regime;
    j["within_target"] = round6(r.within_target);
    j["within_budget"] = round6(r.within_budget);
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

void emit_summary_json(const std::vector<SummaryRow> &rows,
                       const std::filesystem::path &path) {
  std::ofstream out = open_output(path);
  emit_summary_json(rows, out);
  if (!out)
    throw std::runtime_error("write failed: " + path.string());
}

std::vector<SummaryRow> read_summary_json(const std::filesystem::path &path) {
  const json arr = parse_json(read_file(path), path.string());
  if (!arr.is_array())
    throw ConfigError(path.string() + ": expected an array of rows");
  std::vector<SummaryRow> rows;
  try {
    for (const json &j : arr) {
      SummaryRow r;
      r.label = j.at("label").get<std::string>();
      r.horizon = j.at("horizon").get<std::size_t>();
      r.runs = j.at("runs").get<std::size_t>();
      r.reward = j.at("avg_reward").get<double>();
      r.reward_2se = j.at("avg_reward_2se").get<double>();
      r.cost = to_vector(j.at("cost"), "cost");
      r.cost_2se = to_vector(j.at("cost_2se"), "cost_2se");
      r.ride = j.at("ride_cost").get<double>();
      r.ride_2se = j.at("ride_cost_2se").get<double>();
      r.voucher = j.at("voucher_cost").get<double>();
      r.voucher_2se = j.at("voucher_cost_2se").get<double>();
      r.fairness = j.at("fairness_cost").get<double>();
      r.fairness_2se = j.at("fairness_cost_2se").get<double>();
      r.max_regime = j.at("max_regime").get<std::vector<int>>();
      r.within_target = j.at("within_target").get<double>();
      r.within_budget = j.at("within_budget").get<double>();
      rows.push_back(std::move(r));
    }
  } catch (const json::exception &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return rows;
}

std::string format_table(const std::vector<SummaryRow> &rows) {
  auto cell = [](double v, double se) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f (%.4f)", v, se);
    return std::string(buf);
  };
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %-17s %-17s %-17s %-17s\n",
                "strategy", "avg reward", "ride cost", "voucher cost",
                "fairness cost");
  out << line;
  for (const SummaryRow &r : rows) {
    std::snprintf(line, sizeof line, "%-32s %-17s %-17s %-17s %-17s\n",
                  r.label.c_str(), cell(r.reward, r.reward_2se).c_str(),
                  cell(r.ride, r.ride_2se).c_str(),
                  cell(r.voucher, r.voucher_2se).c_str(),
                  cell(r.fairness, r.fairness_2se).c_str());
    out << line;
  }
  return out.str();
}

} // namespace cbwk
