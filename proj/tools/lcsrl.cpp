// Command-line front end: solve, train, compact, evaluate, rollout, sweep, report.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lcsrl/compaction.hpp"
#include "lcsrl/harness/config.hpp"
#include "lcsrl/harness/experiment.hpp"
#include "lcsrl/oracle.hpp"
#include "lcsrl/rollout.hpp"

namespace fs = std::filesystem;
using namespace lcsrl;
using namespace lcsrl::harness;

namespace {

struct CommonOptions {
  std::optional<std::string> env;
  std::optional<std::string> config;
  std::optional<std::string> map;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--env", o.env, "Environment variant")->check(CLI::IsMember({"det", "slip01"}));
  cmd->add_option("--config", o.config, "Key-value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--map", o.map, "Grid map file (8 lines of F/H/G/S)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--workers", o.workers, "Worker threads");
  cmd->add_option("--out", o.out, "Output directory");
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig cfg = o.config ? load_config(*o.config) : ExperimentConfig{};
  if (o.env) cfg.env = parse_env(*o.env);
  if (o.map) cfg.map_file = *o.map;
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  cfg.out_dir = o.out;
  return cfg;
}

std::vector<Instance> require_instances(const std::vector<std::string>& inputs) {
  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  auto instances = load_instances(paths);
  if (instances.empty()) throw std::invalid_argument("no pop-<n>.jsonl files found in the --in paths");
  return instances;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XCSF Q-learning, value-iteration oracle and greedy niche mass compaction on FrozenLake gridworlds"};
  app.require_subcommand(1);

  CommonOptions common;
  std::vector<std::string> inputs;
  std::optional<std::size_t> trials;
  std::optional<std::int64_t> budget;
  std::optional<std::int64_t> cadence;
  std::vector<std::string> masses;
  double rho = 0.99;
  std::string rho_grid = "0:0.99:0.01";
  std::size_t rollouts = 150, successes = 100, step_cap = 200;

  auto* solve = app.add_subcommand("solve", "Value iteration: write qstar.csv and policy.csv");
  add_common(solve, common);

  auto* train = app.add_subcommand("train", "Train XCSF instances: trace.csv, aggregate.csv, pop-<n>.jsonl");
  add_common(train, common);
  train->add_option("--trials", trials, "Independent trials");
  train->add_option("--budget", budget, "Training budget in environment steps");
  train->add_option("--cadence", cadence, "Steps between trace points");

  auto* compact = app.add_subcommand("compact", "Apply GNMC to populations and write the survivors");
  add_common(compact, common);
  compact->add_option("--in", inputs, "Population files or directories")->required();
  compact->add_option("--mass", masses, "Mass function")->check(CLI::IsMember({"fit", "tan", "inv_fit"}));
  compact->add_option("--rho", rho, "Mass removal factor in [0,1)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Q MAE and policy accuracy per population: eval.csv");
  add_common(evaluate_cmd, common);
  evaluate_cmd->add_option("--in", inputs, "Population files or directories")->required();

  auto* rollout_cmd = app.add_subcommand("rollout", "Steps-to-goal testing for groups A/B/C: stg.csv");
  add_common(rollout_cmd, common);
  rollout_cmd->add_option("--in", inputs, "Population files or directories")->required();
  rollout_cmd->add_option("--rollouts", rollouts, "Rollout budget per instance");
  rollout_cmd->add_option("--successes", successes, "Successes needed for complete data");
  rollout_cmd->add_option("--step-cap", step_cap, "Step cap per rollout");

  auto* sweep = app.add_subcommand("sweep", "GNMC rho sweep per mass function: sweep.csv");
  add_common(sweep, common);
  sweep->add_option("--in", inputs, "Population files or directories")->required();
  sweep->add_option("--mass", masses, "Mass functions (default: all)")->check(CLI::IsMember({"fit", "tan", "inv_fit"}));
  sweep->add_option("--rho-grid", rho_grid, "Comma list or start:stop:step");

  auto* report = app.add_subcommand("report", "Per-state optimal-action frequency: heatmap.csv, actions.csv");
  add_common(report, common);
  report->add_option("--in", inputs, "Population files or directories")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = resolve(common);
    const fs::path out = cfg.out_dir;

    if (solve->parsed()) {
      const auto world = cfg.world();
      const auto oracle = Oracle::solve(world);
      auto q = open_output(out / "qstar.csv");
      write_qtable_csv(q, oracle.q_star);
      auto p = open_output(out / "policy.csv");
      write_policy_csv(p, oracle.pi_star);
      std::cout << fmt::format("V*(start) = {:.6f}\n", state_value(oracle.q_star.at({0, 0})));
    } else if (train->parsed()) {
      if (trials) cfg.trials = *trials;
      if (budget) cfg.budget = *budget;
      if (cadence) cfg.cadence = *cadence;
      const auto results = run_training_experiment(cfg);
      for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& trace = results[k].trace;
        if (trace.empty()) continue;
        std::cout << fmt::format("trial {}: mae {:.4f} accuracy {:.3f} macro {} micro {}\n", k, trace.back().mae,
                                 trace.back().policy_accuracy, trace.back().macro_count, trace.back().micro_count);
      }
    } else if (compact->parsed()) {
      const auto world = cfg.world();
      const auto mass = compaction::mass_by_name(masses.empty() ? "fit" : masses.front());
      auto instances = require_instances(inputs);
      for (auto& inst : instances) inst.population = compact_instance(inst, world, {mass, rho});
      save_instances(out, instances);
    } else if (evaluate_cmd->parsed()) {
      const auto world = cfg.world();
      const auto rows = evaluate_instances(require_instances(inputs), world, Oracle::solve(world));
      auto csv = open_output(out / "eval.csv");
      write_eval_csv(csv, rows);
    } else if (rollout_cmd->parsed()) {
      const auto world = cfg.world();
      rollout::StgConfig stg;
      stg.budget = rollouts;
      stg.success_target = successes;
      stg.step_cap = step_cap;
      const auto rows = run_stg_groups(require_instances(inputs), world, default_stg_groups(), cfg.seed, stg, cfg.workers);
      auto csv = open_output(out / "stg.csv");
      write_stg_csv(csv, rows);
    } else if (sweep->parsed()) {
      const auto world = cfg.world();
      const auto instances = require_instances(inputs);
      if (masses.empty()) masses = compaction::mass_names();
      const auto rows = run_compaction_sweep(instances, world, masses, parse_rho_grid(rho_grid), cfg.workers);
      auto csv = open_output(out / "sweep.csv");
      write_sweep_csv(csv, rows, instances.size());
    } else if (report->parsed()) {
      const auto world = cfg.world();
      const auto instances = require_instances(inputs);
      auto heat = open_output(out / "heatmap.csv");
      auto acts = open_output(out / "actions.csv");
      write_state_reports(instances, world, heat, acts);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
