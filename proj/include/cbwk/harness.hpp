#pragma once

#include "cbwk/dual_strategy.hpp"
#include "cbwk/estimators.hpp"
#include "cbwk/finite_env.hpp"
#include "cbwk/primal_strategy.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cbwk {

/// A finite-context instance as read from an instance file.
struct FiniteInstance {
  Vector weights;
  Matrix reward;            ///< |X| x |A|
  std::vector<Matrix> cost; ///< d x |A| per context
  Vector budgets;
  FiniteEnvironment::CostNoise noise = FiniteEnvironment::CostNoise::none;
  std::optional<ActionId> null_action;
  /// Components the "spend" margin convention applies to (all when empty).
  Vector spend_mask;
};

struct EnvSpec {
  enum class Kind { court, finite } kind = Kind::court;
  double tau = 1e-7;
  SigmoidConvention sigmoid = SigmoidConvention::standard;
  std::optional<FiniteInstance> instance;
};

struct StrategySpec {
  enum class Kind { pgd_fixed, pgd_adaptive, primal, mixed, oracle_static };
  Kind kind = Kind::pgd_fixed;
  double gamma = 0.01;
  // pgd_adaptive (margin_auto: b_T on every component)
  ThresholdMode threshold_mode = ThresholdMode::practical;
  double practical_c = 0.01;
  double beta_constant = 1.0;
  bool margin_auto = false;
  // primal
  SlackMode slack = SlackMode::soft;
  BetaSource beta_source = BetaSource::running;
  double beta_fixed = 0.0;
  /// Use the true context distribution instead of the empirical one.
  bool exact_nu = false;
  // mixed: a fixed lambda, or estimated once per batch at the target budget
  std::optional<Vector> lambda;
  Index opt_samples = 10000;
  std::size_t opt_reps = 20;
  std::uint64_t opt_seed = 12345;
};

struct EstimatorSpec {
  enum class Kind { oracle, linear, logistic } kind = Kind::logistic;
  /// Defaults: 0.025 for logistic, 1 for linear.
  std::optional<double> c_delta;
  /// Defaults: 0 for logistic, 1 for linear.
  std::optional<double> ridge;
};

enum class MarginConvention { all, spend };

struct ExperimentConfig {
  std::string label;
  EnvSpec env;
  StrategySpec strategy;
  EstimatorSpec estimator;
  std::size_t horizon = 10000;
  std::size_t warmup = 50;
  std::size_t seeds = 20;
  std::uint64_t base_seed = 1;
  double delta = 0.05;
  MarginConvention margin_convention = MarginConvention::spend;
  double margin_b = 0.005;
  /// Averages start at round 1 instead of warmup + 1.
  bool include_warmup = false;
  std::size_t threads = 0;

  void validate() const;
};

/// Parses the JSON config grammar documented in the README. Relative
/// instance paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string &text,
                              const std::filesystem::path &base_dir = {});
ExperimentConfig load_config(const std::filesystem::path &path);
FiniteInstance parse_instance(const std::string &text);

/// Everything a single run needs, built once per batch.
class Experiment {
public:
  explicit Experiment(ExperimentConfig cfg);

  const ExperimentConfig &config() const { return cfg_; }
  const Environment &environment() const { return *env_; }
  const BudgetVector &budgets() const { return budgets_; }
  /// Budget minus margin.
  const Vector &target() const { return target_; }
  const Vector &margin() const { return margin_; }
  /// 1 on the components the margin convention applies to.
  const Vector &margin_mask() const { return margin_mask_; }
  bool is_court() const { return cfg_.env.kind == EnvSpec::Kind::court; }
  /// Lambda used by the mixed strategy (empty otherwise).
  const Vector &mixed_lambda() const { return mixed_lambda_; }

  std::unique_ptr<Estimator> make_estimator() const;
  std::unique_ptr<Strategy> make_strategy() const;

private:
  ExperimentConfig cfg_;
  std::shared_ptr<const Environment> env_;
  BudgetVector budgets_;
  Vector margin_;
  Vector margin_mask_;
  Vector target_;
  Vector mixed_lambda_;
  std::vector<PolicyDistribution> static_policies_;
};

/// The round loop. Warm-up rounds play uniformly at random; the estimator is
/// updated every round. Deterministic given the seed.
Trajectory run_single(const Experiment &exp, std::uint64_t seed);
Trajectory run_single(const ExperimentConfig &cfg, std::uint64_t seed);

/// Per-run running averages from the first counted round.
struct RunSeries {
  std::vector<std::size_t> t;
  Vector avg_reward;
  Matrix avg_cost;  ///< rounds x d
  Vector fairness;  ///< court only; empty otherwise
};

RunSeries running_averages(const Trajectory &traj, bool include_warmup,
                           bool court);

struct AggregateSeries {
  bool court = false;
  std::vector<std::size_t> t;
  Vector reward_mean, reward_se;
  Matrix cost_mean, cost_se; ///< rounds x d
  Vector fairness_mean, fairness_se;

  std::size_t size() const { return t.size(); }
};

/// Mean and standard error across runs, round by round.
AggregateSeries aggregate(const std::vector<RunSeries> &runs, bool court);

struct SummaryRow {
  std::string label;
  std::size_t horizon = 0;
  std::size_t runs = 0;
  double reward = 0.0, reward_2se = 0.0;
  Vector cost, cost_2se;
  /// Court: ride, voucher and fairness at the final round.
  double ride = 0.0, ride_2se = 0.0;
  double voucher = 0.0, voucher_2se = 0.0;
  double fairness = 0.0, fairness_2se = 0.0;
  /// Highest regime index reached, per run.
  std::vector<int> max_regime;
  /// Fraction of runs with cumulated costs (all T rounds) <= T * target on
  /// every component the margin applies to, and <= T * B on every component.
  double within_target = 0.0;
  double within_budget = 0.0;
};

struct BatchResult {
  AggregateSeries series;
  SummaryRow summary;
  /// Cumulated cost vectors at T, per run (ordered by seed).
  std::vector<Vector> cum_costs;
};

/// Runs seeds base .. base + N - 1 in parallel and reduces in seed order.
BatchResult run_batch(const ExperimentConfig &cfg);

void emit_csv(const AggregateSeries &series, std::ostream &out);
void emit_csv(const AggregateSeries &series, const std::filesystem::path &path);
void emit_summary_json(const std::vector<SummaryRow> &rows, std::ostream &out);
void emit_summary_json(const std::vector<SummaryRow> &rows,
                       const std::filesystem::path &path);
std::vector<SummaryRow> read_summary_json(const std::filesystem::path &path);

/// Plain-text summary table, one row per strategy.
std::string format_table(const std::vector<SummaryRow> &rows);

} // namespace cbwk
