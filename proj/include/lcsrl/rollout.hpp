#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lcsrl/env.hpp"
#include "lcsrl/metrics.hpp"
#include "lcsrl/oracle.hpp"
#include "lcsrl/random.hpp"
#include "lcsrl/xcsf/classifier.hpp"

namespace lcsrl::rollout {

struct StgConfig {
  std::size_t budget = 150;  // rollouts
  std::size_t success_target = 100;
  std::size_t step_cap = 200;
  std::uint64_t base_seed = 0;  // rollout i uses base_seed + i
  State start{0, 0};
};

struct StgReport {
  std::optional<double> mean_stg;
  std::optional<std::size_t> max_stg;
  std::size_t num_rollouts = 0;
  std::size_t successes = 0;
  bool complete = false;
};

using Policy = std::function<Action(State)>;

/// Steps-to-goal testing: greedy rollouts from the start state until
/// success_target successes are recorded or the rollout budget runs out.
inline StgReport stg_test(const GridWorld& world, const Policy& policy, const StgConfig& cfg = {}) {
  if (world.is_terminal(cfg.start)) throw PreconditionError("stg_test: start state is terminal");
  StgReport report;
  std::size_t total_steps = 0;
  std::size_t longest = 0;
  while (report.num_rollouts < cfg.budget && report.successes < cfg.success_target) {
    Rng rng(cfg.base_seed + report.num_rollouts);
    ++report.num_rollouts;
    State s = cfg.start;
    for (std::size_t steps = 1; steps <= cfg.step_cap; ++steps) {
      const Transition tr = step(world, s, policy(s), rng);
      if (tr.terminal) {
        if (world.cell(tr.next) == Cell::Goal) {
          ++report.successes;
          total_steps += steps;
          longest = std::max(longest, steps);
        }
        break;
      }
      s = tr.next;
    }
  }
  report.complete = report.successes >= cfg.success_target;
  if (report.successes > 0) {
    report.mean_stg = static_cast<double>(total_steps) / static_cast<double>(report.successes);
    report.max_stg = longest;
  }
  return report;
}

/// First maximal action in [Left, Down, Right, Up] order.
inline Action first_best(const xcsf::PredictionArray& pa) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < kNumActions; ++i)
    if (pa[i] && (!best || *pa[i] > *pa[*best])) best = i;
  if (!best) throw CoverageGapError("no advocated action");
  return action_at(*best);
}

/// Greedy lookup table over non-terminal states, aligned with the world.
inline Policy greedy_policy(const SystemPredictions& predictions, const GridWorld& world) {
  std::vector<Action> table;
  for (const auto& pa : predictions.values) table.push_back(first_best(pa));
  return [table = std::move(table), &world](State s) { return table[*world.state_index(s)]; };
}

inline Policy greedy_policy(const QTable& q, const GridWorld& world) { return greedy_policy(from_qtable(q), world); }

inline StgReport stg_test(const xcsf::Population& pop, const GridWorld& world, const StgConfig& cfg = {}) {
  const auto predictions = system_predictions(pop, world);
  require_gap_free(predictions);
  return stg_test(world, greedy_policy(predictions, world), cfg);
}

}  // namespace lcsrl::rollout
