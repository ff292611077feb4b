#include "cbwk/cli.hpp"

#include "cbwk/diagnostics.hpp"
#include "cbwk/fairness.hpp"
#include "cbwk/harness.hpp"
#include "cbwk/oracles.hpp"
#include "cbwk/selftest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cbwk {

namespace {

namespace fs = std::filesystem;

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> seed;
  bool include_warmup = false;
  std::optional<std::size_t> threads;
};

struct OptArgs {
  std::string env = "court";
  double tau = 1e-7;
  std::string budget_file;
  Index samples = 10000;
  std::size_t reps = 20;
  std::uint64_t seed = 1;
  double margin_b = 0.0;
  std::string json_out;
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_run(const RunArgs &a) {
  ExperimentConfig cfg = load_config(a.config);
  if (a.seeds)
    cfg.seeds = *a.seeds;
  if (a.seed)
    cfg.base_seed = *a.seed;
  if (a.include_warmup)
    cfg.include_warmup = true;
  if (a.threads)
    cfg.threads = *a.threads;
  cfg.validate();
  if (cfg.label.empty())
    cfg.label = fs::path(a.config).stem().string();

  const auto t0 = std::chrono::steady_clock::now();
  const BatchResult res = run_batch(cfg);
  const double sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(a.out);
  emit_csv(res.series, fs::path(a.out) / "series.csv");
  emit_summary_json({res.summary}, fs::path(a.out) / "summary.json");
  {
    std::ofstream echo(fs::path(a.out) / "config.json", std::ios::binary);
    echo << slurp(a.config);
  }
  std::cout << format_table({res.summary});
  std::printf("runs=%zu  T=%zu  within target: %.2f  within budget: %.2f  "
              "(%.1f s)\n",
              res.summary.runs, res.summary.horizon, res.summary.within_target,
              res.summary.within_budget, sec);
  return 0;
}

Vector read_budget_file(const std::string &path) {
  const nlohmann::json j = nlohmann::json::parse(slurp(path), nullptr, false);
  const nlohmann::json *arr = &j;
  if (j.is_object() && j.contains("budgets"))
    arr = &j["budgets"];
  if (!arr->is_array())
    throw ConfigError(path + ": expected an array or {\"budgets\": [...]}");
  Vector b(static_cast<Index>(arr->size()));
  for (std::size_t i = 0; i < arr->size(); ++i) {
    if (!(*arr)[i].is_number())
      throw ConfigError(path + ": budgets must be numbers");
    b(static_cast<Index>(i)) = (*arr)[i].get<double>();
  }
  return b;
}

int cmd_opt(const OptArgs &a) {
  if (a.env != "court")
    throw ConfigError("opt: only --env court is supported");
  const CourtEnvironment env(a.tau);
  Vector budgets = a.budget_file.empty() ? env.budgets().values()
                                         : read_budget_file(a.budget_file);
  if (budgets.size() != env.cost_dim())
    throw ConfigError("opt: budget file must list " +
                      std::to_string(env.cost_dim()) + " components");
  budgets -= a.margin_b * CourtEnvironment::spend_mask();

  const auto t0 = std::chrono::steady_clock::now();
  const OptEstimate est = estimate_opt(env, budgets, a.samples, a.reps, a.seed);
  const double sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::printf("OPT = %.4f (2SE %.4f)  J=%zu  S=%lld  certified reps: %zu  "
              "(%.1f s)\n",
              est.value, 2.0 * est.std_error, est.reps,
              static_cast<long long>(a.samples), est.converged_reps, sec);
  std::printf("lambda* =");
  for (Index i = 0; i < est.lambda_star.dim(); ++i)
    std::printf(" %.4g", est.lambda_star.values()(i));
  std::printf("\n");

  if (!a.json_out.empty()) {
    nlohmann::json j;
    j["opt"] = est.value;
    j["std_error"] = est.std_error;
    j["reps"] = est.reps;
    j["samples"] = a.samples;
    j["tau"] = a.tau;
    j["converged_reps"] = est.converged_reps;
    j["lambda_star"] = std::vector<double>(
        est.lambda_star.values().data(),
        est.lambda_star.values().data() + est.lambda_star.dim());
    std::ofstream out(a.json_out, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write " + a.json_out);
    out << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_table(const std::string &dir) {
  std::vector<fs::path> files;
  for (const auto &entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().filename() == "summary.json")
      files.push_back(entry.path());
  if (files.empty())
    throw ConfigError("table: no summary.json under " + dir);
  std::sort(files.begin(), files.end());
  std::vector<SummaryRow> rows;
  for (const fs::path &f : files)
    for (SummaryRow &r : read_summary_json(f))
      rows.push_back(std::move(r));
  std::cout << format_table(rows);
  return 0;
}

int cmd_selftest() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<SelftestResult> results = run_selftest();
  const double sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::size_t passed = 0;
  for (const SelftestResult &r : results) {
    std::printf("%s  %-24s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    passed += r.passed ? 1 : 0;
  }
  std::printf("selftest: %zu/%zu passed in %.1f s\n", passed, results.size(), sec);
  return passed == results.size() ? 0 : 2;
}

} // namespace

int run_cli(int argc, char **argv) {
  CLI::App app{"Contextual bandits with knapsacks: experiments and oracles"};
  app.require_subcommand(1);

  RunArgs run;
  auto *run_cmd = app.add_subcommand("run", "Run an N-seed batch from a config");
  run_cmd->add_option("--config", run.config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--seeds", run.seeds, "Number of seeds N")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "Base seed");
  run_cmd->add_flag("--include-warmup", run.include_warmup,
                    "Average from round 1 instead of warmup + 1");
  run_cmd->add_option("--threads", run.threads, "Worker threads (0: all cores)");

  OptArgs opt;
  auto *opt_cmd = app.add_subcommand("opt", "Estimate OPT and lambda* by dual "
                                            "minimization on sampled contexts");
  opt_cmd->add_option("--env", opt.env, "Environment (court)");
  opt_cmd->add_option("--tau", opt.tau, "Fairness tolerance");
  opt_cmd->add_option("--budget-file", opt.budget_file,
                      "JSON budget vector (default: environment budgets)")
      ->check(CLI::ExistingFile);
  opt_cmd->add_option("--samples", opt.samples, "Contexts per repetition S")
      ->check(CLI::PositiveNumber);
  opt_cmd->add_option("--reps", opt.reps, "Repetitions J")
      ->check(CLI::PositiveNumber);
  opt_cmd->add_option("--seed", opt.seed, "Seed of the first repetition");
  opt_cmd->add_option("--margin-b", opt.margin_b,
                      "Subtract b from the two spend budgets");
  opt_cmd->add_option("--json", opt.json_out, "Write the estimate as JSON");

  std::string runs_dir;
  auto *table_cmd =
      app.add_subcommand("table", "Assemble a summary table from run outputs");
  table_cmd->add_option("--runs", runs_dir, "Directory of run outputs")
      ->required()
      ->check(CLI::ExistingDirectory);

  auto *selftest_cmd = app.add_subcommand("selftest", "Run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd)
      return cmd_run(run);
    if (*opt_cmd)
      return cmd_opt(opt);
    if (*table_cmd)
      return cmd_table(runs_dir);
    if (*selftest_cmd)
      return cmd_selftest();
  } catch (const ConfigError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}

} // namespace cbwk
