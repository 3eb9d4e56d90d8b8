#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "lcsrl/compaction.hpp"
#include "lcsrl/csv.hpp"
#include "lcsrl/harness/config.hpp"
#include "lcsrl/harness/pool.hpp"
#include "lcsrl/metrics.hpp"
#include "lcsrl/oracle.hpp"
#include "lcsrl/random.hpp"
#include "lcsrl/rollout.hpp"
#include "lcsrl/xcsf/serialize.hpp"
#include "lcsrl/xcsf/train.hpp"

namespace lcsrl::harness {

namespace fs = std::filesystem;

// Seed streams derived from the master seed.
inline constexpr std::uint64_t kTrainStream = 0;
inline constexpr std::uint64_t kRolloutStream = 1'000'000;

inline std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) { return derive_seed(master, kTrainStream + trial); }
inline std::uint64_t rollout_base_seed(std::uint64_t master, std::size_t instance) {
  return derive_seed(master, kRolloutStream + instance);
}

struct Oracle {
  QTable q_star;
  AdvocacyPolicy pi_star;

  static Oracle solve(const GridWorld& world, double tol = 1e-12, double tie_tol = 1e-9) {
    auto q = value_iteration(world, tol);
    auto pi = greedy_advocacy(q, tie_tol);
    return {std::move(q), std::move(pi)};
  }
};

/// A trained population together with its trial number.
struct Instance {
  std::size_t id = 0;
  xcsf::Population population;
};

struct Stats {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;
};

/// Mean and population standard deviation over the finite samples.
inline Stats summarize(const std::vector<double>& samples) {
  Stats s;
  double sum = 0.0;
  for (double v : samples)
    if (std::isfinite(v)) {
      sum += v;
      ++s.count;
    }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  double sq = 0.0;
  for (double v : samples)
    if (std::isfinite(v)) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(s.count));
  return s;
}

inline std::ofstream open_output(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file " + path.string());
  return out;
}

inline std::string population_file_name(std::size_t id) { return fmt::format("pop-{}.jsonl", id); }

// ---------------------------------------------------------------------------
// Training

inline void write_trace_csv(std::ostream& out, const std::vector<xcsf::TrainResult>& trials) {
  CsvWriter csv(out, {"trace", 1}, {"trial", "step", "mae", "policy_accuracy", "macro", "micro"});
  for (std::size_t k = 0; k < trials.size(); ++k)
    for (const auto& p : trials[k].trace) csv.row(k, p.step, p.mae, p.policy_accuracy, p.macro_count, p.micro_count);
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<xcsf::TrainResult>& trials) {
  CsvWriter csv(out, {"aggregate", 1},
                {"step", "trials", "mae_mean", "mae_std", "accuracy_mean", "accuracy_std", "macro_mean", "macro_std",
                 "micro_mean", "micro_std"});
  std::map<std::int64_t, std::array<std::vector<double>, 4>> by_step;
  for (const auto& trial : trials)
    for (const auto& p : trial.trace) {
      auto& cols = by_step[p.step];
      cols[0].push_back(p.mae);
      cols[1].push_back(p.policy_accuracy);
      cols[2].push_back(static_cast<double>(p.macro_count));
      cols[3].push_back(static_cast<double>(p.micro_count));
    }
  for (const auto& [step, cols] : by_step) {
    const auto mae = summarize(cols[0]);
    const auto acc = summarize(cols[1]);
    const auto macro = summarize(cols[2]);
    const auto micro = summarize(cols[3]);
    csv.row(step, cols[1].size(), mae.mean, mae.std, acc.mean, acc.std, macro.mean, macro.std, micro.mean, micro.std);
  }
}

/// Trains cfg.trials independent instances and writes trace.csv,
/// aggregate.csv, config.txt and one pop-<trial>.jsonl per trial.
inline std::vector<xcsf::TrainResult> run_training_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const GridWorld world = cfg.world();
  const auto budget = cfg.effective_budget();
  std::vector<xcsf::TrainResult> trials(cfg.trials);
  parallel_for(cfg.trials, cfg.workers, [&](std::size_t k) {
    trials[k] = xcsf::train(world, cfg.hp, budget, trial_seed(cfg.seed, k), {.cadence = cfg.cadence});
  });

  open_output(cfg.out_dir / "config.txt") << config_text(cfg);
  {
    auto out = open_output(cfg.out_dir / "trace.csv");
    write_trace_csv(out, trials);
  }
  {
    auto out = open_output(cfg.out_dir / "aggregate.csv");
    write_aggregate_csv(out, trials);
  }
  for (std::size_t k = 0; k < trials.size(); ++k)
    xcsf::save_population(cfg.out_dir / population_file_name(k), trials[k].population);
  return trials;
}

// ---------------------------------------------------------------------------
// Population sets

/// Loads populations from files or directories (pop-<n>.jsonl). Instances are
/// ordered by trial number.
inline std::vector<Instance> load_instances(const std::vector<fs::path>& inputs) {
  static const std::regex pattern(R"(pop-(\d+)\.jsonl)");
  std::vector<std::pair<std::size_t, fs::path>> files;
  auto add = [&](const fs::path& p) {
    std::smatch m;
    const auto name = p.filename().string();
    if (!std::regex_match(name, m, pattern))
      throw std::invalid_argument("population file name must look like pop-<n>.jsonl: " + p.string());
    files.emplace_back(std::stoul(m[1].str()), p);
  };
  for (const auto& in : inputs) {
    if (!fs::exists(in)) throw std::invalid_argument("no such population file or directory: " + in.string());
    if (fs::is_directory(in)) {
      for (const auto& entry : fs::directory_iterator(in)) {
        std::smatch m;
        const auto name = entry.path().filename().string();
        if (std::regex_match(name, m, pattern)) add(entry.path());
      }
    } else {
      add(in);
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Instance> out;
  for (const auto& [id, path] : files) out.push_back({id, xcsf::load_population(path)});
  return out;
}

inline void save_instances(const fs::path& dir, const std::vector<Instance>& instances) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  for (const auto& inst : instances) xcsf::save_population(dir / population_file_name(inst.id), inst.population);
}

inline xcsf::Population compact_instance(const Instance& inst, const GridWorld& world,
                                         const compaction::CompactionConfig& cfg) {
  try {
    return compaction::gnmc(inst.population, world, cfg);
  } catch (const CoverageGapError& e) {
    throw CoverageGapError(fmt::format("population {}: {}", inst.id, e.what()));
  }
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalRow {
  std::size_t instance = 0;
  std::string stage;
  EvalReport report;
};

inline void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows) {
  CsvWriter csv(out, {"eval", 1}, {"trial", "stage", "mae", "policy_accuracy", "macro", "micro"});
  for (const auto& r : rows)
    csv.row(r.instance, r.stage, r.report.mae, r.report.policy_accuracy, r.report.macro_count, r.report.micro_count);
}

inline std::vector<EvalRow> evaluate_instances(const std::vector<Instance>& instances, const GridWorld& world,
                                               const Oracle& oracle, const std::string& stage = "final") {
  std::vector<EvalRow> rows;
  for (const auto& inst : instances)
    rows.push_back({inst.id, stage, evaluate(inst.population, world, oracle.q_star, oracle.pi_star)});
  return rows;
}

// ---------------------------------------------------------------------------
// Compaction sweep

struct SweepRow {
  std::string mass;
  double rho = 0.0;
  Stats mae, accuracy, macro, micro;
};

/// Compacts a fresh copy of every population at each (mass, rho) and
/// averages the resulting metrics over the populations.
inline std::vector<SweepRow> run_compaction_sweep(const std::vector<Instance>& instances, const GridWorld& world,
                                                  const std::vector<std::string>& masses,
                                                  const std::vector<double>& rho_grid, std::size_t workers = 1) {
  const auto oracle = Oracle::solve(world);
  struct Cell {
    std::string mass;
    double rho;
  };
  std::vector<Cell> cells;
  for (const auto& m : masses)
    for (double rho : rho_grid) cells.push_back({m, rho});

  // per cell, per instance
  std::vector<std::vector<EvalReport>> reports(cells.size(), std::vector<EvalReport>(instances.size()));
  parallel_for(cells.size() * instances.size(), workers, [&](std::size_t job) {
    const auto& cell = cells[job / instances.size()];
    const auto& inst = instances[job % instances.size()];
    const compaction::CompactionConfig cfg{compaction::mass_by_name(cell.mass), cell.rho};
    reports[job / instances.size()][job % instances.size()] =
        evaluate(compact_instance(inst, world, cfg), world, oracle.q_star, oracle.pi_star);
  });

  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::array<std::vector<double>, 4> cols;
    for (const auto& r : reports[c]) {
      cols[0].push_back(r.mae);
      cols[1].push_back(r.policy_accuracy);
      cols[2].push_back(static_cast<double>(r.macro_count));
      cols[3].push_back(static_cast<double>(r.micro_count));
    }
    rows.push_back({cells[c].mass, cells[c].rho, summarize(cols[0]), summarize(cols[1]), summarize(cols[2]),
                    summarize(cols[3])});
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, std::size_t instances) {
  CsvWriter csv(out, {"sweep", 1},
                {"mass", "rho", "instances", "mae_mean", "mae_std", "accuracy_mean", "accuracy_std", "macro_mean",
                 "macro_std", "micro_mean", "micro_std"});
  for (const auto& r : rows)
    csv.row(r.mass, r.rho, instances, r.mae.mean, r.mae.std, r.accuracy.mean, r.accuracy.std, r.macro.mean,
            r.macro.std, r.micro.mean, r.micro.std);
}

/// Parses "a,b,c" or "start:stop:step" (inclusive stop).
inline std::vector<double> parse_rho_grid(const std::string& text) {
  std::vector<double> grid;
  auto number = [&](const std::string& s) { return detail::parse_number<double>("rho-grid", detail::trim(s)); };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("rho grid range must be start:stop:step");
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0)) throw std::invalid_argument("rho grid step must be positive");
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) grid.push_back(std::round((start + i * step) * 1e12) / 1e12);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) grid.push_back(number(p));
  }
  for (double rho : grid)
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument(fmt::format("rho {} outside [0,1)", rho));
  return grid;
}

// ---------------------------------------------------------------------------
// Steps-to-goal groups

struct StgGroup {
  std::string name;
  std::optional<std::string> mass;  // no compaction when absent
  double rho = 0.0;
};

inline std::vector<StgGroup> default_stg_groups() {
  return {{"A", std::nullopt, 0.0}, {"B", "fit", 0.99}, {"C", "inv_fit", 0.99}};
}

struct StgRow {
  std::size_t instance = 0;
  std::string group;
  rollout::StgReport report;
  double policy_accuracy = 0.0;
};

inline std::vector<StgRow> run_stg_groups(const std::vector<Instance>& instances, const GridWorld& world,
                                          const std::vector<StgGroup>& groups, std::uint64_t master_seed,
                                          const rollout::StgConfig& base = {}, std::size_t workers = 1) {
  const auto oracle = Oracle::solve(world);
  std::vector<StgRow> rows(instances.size() * groups.size());
  parallel_for(rows.size(), workers, [&](std::size_t job) {
    const auto& inst = instances[job / groups.size()];
    const auto& group = groups[job % groups.size()];
    const auto pop = group.mass
                         ? compact_instance(inst, world, {compaction::mass_by_name(*group.mass), group.rho})
                         : inst.population;
    auto cfg = base;
    cfg.base_seed = rollout_base_seed(master_seed, inst.id);
    const auto report = rollout::stg_test(pop, world, cfg);
    const auto eval = evaluate(pop, world, oracle.q_star, oracle.pi_star);
    rows[job] = {inst.id, group.name, report, eval.policy_accuracy};
  });
  return rows;
}

inline void write_stg_csv(std::ostream& out, const std::vector<StgRow>& rows) {
  CsvWriter csv(out, {"stg", 1},
                {"instance", "group", "mean_stg", "max_stg", "num_rollouts", "policy_accuracy", "successes",
                 "complete"});
  for (const auto& r : rows)
    csv.row(r.instance, r.group, r.report.mean_stg, r.report.max_stg, r.report.num_rollouts, r.policy_accuracy,
            r.report.successes, r.report.complete ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Per-state reports

/// heatmap.csv: per-state optimal-action frequency over the instances;
/// actions.csv: per-state tally of advocated actions.
inline void write_state_reports(const std::vector<Instance>& instances, const GridWorld& world,
                                std::ostream& heatmap, std::ostream& actions) {
  if (instances.empty()) throw std::invalid_argument("state report needs at least one population");
  const auto oracle = Oracle::solve(world);
  std::vector<std::vector<int>> correct;
  std::vector<AdvocacyPolicy> policies;
  for (const auto& inst : instances) {
    auto r = evaluate(inst.population, world, oracle.q_star, oracle.pi_star);
    correct.push_back(std::move(r.per_state_correct));
    policies.push_back(std::move(r.pi_hat));
  }
  const auto freq = optimal_action_frequency(correct);
  const auto tally = action_prediction_tally(policies);
  const auto& states = world.nonterminal_states();

  CsvWriter h(heatmap, {"heatmap", 1}, {"x", "y", "frequency", "instances"});
  for (std::size_t k = 0; k < states.size(); ++k) h.row(states[k].x, states[k].y, freq[k], instances.size());

  CsvWriter a(actions, {"actions", 1}, {"x", "y", "left", "down", "right", "up", "optimal", "frequency"});
  for (std::size_t k = 0; k < states.size(); ++k)
    a.row(states[k].x, states[k].y, tally[k][0], tally[k][1], tally[k][2], tally[k][3],
          advocacy_string(oracle.pi_star.vectors[k]), freq[k]);
}

}  // namespace lcsrl::harness
