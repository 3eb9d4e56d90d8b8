#pragma once

#include <cstdint>
#include <vector>

#include "lcsrl/env.hpp"
#include "lcsrl/metrics.hpp"
#include "lcsrl/oracle.hpp"
#include "lcsrl/random.hpp"
#include "lcsrl/xcsf/engine.hpp"

namespace lcsrl::xcsf {

struct TracePoint {
  std::int64_t step = 0;
  double mae = 0.0;
  double policy_accuracy = 0.0;
  std::size_t macro_count = 0;
  std::size_t micro_count = 0;
};

struct TrainOptions {
  std::int64_t cadence = 10'000;  // steps between trace points; 0 disables the trace
  double oracle_tol = 1e-12;
  double oracle_tie_tol = 1e-9;
};

struct TrainResult {
  Population population;
  std::vector<TracePoint> trace;
  std::int64_t steps = 0;
  std::int64_t episodes = 0;
};

/// Runs the reinforcement cycle for one step's action set and fires the GA
/// when the set is due.
inline void learn_from(Population& pop, std::span<const std::uint64_t> set_ids, const Input& s, double target,
                       std::int64_t t, const Hyperparams& hp, Rng& rng) {
  auto set = pop.resolve(set_ids);
  reinforce(pop, set, s, target, hp);
  if (hp.action_set_subsumption) {
    action_set_subsumption(pop, set, hp);
    set = pop.resolve(set_ids);
  }
  if (ga_due(pop, set, t, hp)) run_ga(pop, set, t, hp, rng);
}

/// Multi-step Q-learning with uniformly random non-terminal start states and
/// epsilon-greedy action selection. The budget counts environment steps.
inline TrainResult train(const GridWorld& world, const Hyperparams& hp, std::int64_t budget, std::uint64_t seed,
                         const TrainOptions& options = {}) {
  hp.validate();
  if (budget < 0) throw std::invalid_argument("train: budget must be nonnegative");
  TrainResult result{make_population(Domain::of(world), hp), {}, 0, 0};
  Population& pop = result.population;
  Rng rng(seed);

  std::optional<QTable> q_star;
  std::optional<AdvocacyPolicy> pi_star;
  if (options.cadence > 0 && budget > 0) {
    q_star = value_iteration(world, options.oracle_tol);
    pi_star = greedy_advocacy(*q_star, options.oracle_tie_tol);
  }
  auto record = [&](std::int64_t t) {
    const auto report = evaluate(pop, world, *q_star, *pi_star);
    result.trace.push_back({t, report.mae, report.policy_accuracy, report.macro_count, report.micro_count});
  };

  const auto& starts = world.nonterminal_states();
  std::int64_t t = 0;
  while (t < budget) {
    ++result.episodes;
    State s = starts[rng.index(starts.size())];
    std::vector<std::uint64_t> prev_set;
    Input prev_input{};
    double prev_reward = 0.0;

    for (std::size_t episode_steps = 0; t < budget; ++episode_steps) {
      if (episode_steps == hp.episode_step_cap) {
        // truncated, not terminal: bootstrap the last action set from s
        if (!prev_set.empty()) {
          const auto input = to_input(s);
          const auto match = generate_match_set(pop, input, t, hp, rng);
          const double target = prev_reward + hp.gamma * max_prediction(prediction_array(pop, match, input));
          learn_from(pop, prev_set, prev_input, target, t, hp, rng);
        }
        break;
      }

      const auto input = to_input(s);
      const auto match = generate_match_set(pop, input, t, hp, rng);
      const auto pa = prediction_array(pop, match, input);
      const Action a = select_action(pa, hp.explore_rate, rng);
      const auto set_ids = pop.ids_of(action_subset(pop, match, a));
      const Transition tr = step(world, s, a, rng);
      ++t;

      if (!prev_set.empty())
        learn_from(pop, prev_set, prev_input, prev_reward + hp.gamma * max_prediction(pa), t, hp, rng);

      if (tr.terminal) {
        learn_from(pop, set_ids, input, tr.reward, t, hp, rng);
        prev_set.clear();
      } else {
        prev_set = set_ids;
        prev_input = input;
        prev_reward = tr.reward;
      }
      if (q_star && t % options.cadence == 0) record(t);
      if (tr.terminal) break;
      s = tr.next;
    }
  }
  result.steps = t;
  return result;
}

}  // namespace lcsrl::xcsf
