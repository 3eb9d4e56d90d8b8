#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "lcsrl/env.hpp"
#include "lcsrl/errors.hpp"
#include "lcsrl/oracle.hpp"
#include "lcsrl/xcsf/engine.hpp"

namespace lcsrl {

/// System predictions for every non-terminal state (aligned with
/// GridWorld::nonterminal_states()); absent entries are coverage gaps.
struct SystemPredictions {
  std::vector<State> states;
  std::vector<xcsf::PredictionArray> values;
};

inline SystemPredictions system_predictions(const xcsf::Population& pop, const GridWorld& world) {
  SystemPredictions out{world.nonterminal_states(), {}};
  out.values.reserve(out.states.size());
  for (State s : out.states) {
    const auto input = xcsf::to_input(s);
    const auto match = xcsf::match_indices(pop, input);
    out.values.push_back(xcsf::prediction_array(pop, match, input));
  }
  return out;
}

inline SystemPredictions from_qtable(const QTable& q) {
  SystemPredictions out{q.states, {}};
  for (const auto& v : q.values) {
    xcsf::PredictionArray pa;
    for (std::size_t i = 0; i < kNumActions; ++i) pa[i] = v[i];
    out.values.push_back(pa);
  }
  return out;
}

inline std::optional<std::pair<State, Action>> first_gap(const SystemPredictions& p) {
  for (std::size_t k = 0; k < p.states.size(); ++k)
    for (std::size_t i = 0; i < kNumActions; ++i)
      if (!p.values[k][i]) return std::pair{p.states[k], action_at(i)};
  return std::nullopt;
}

inline std::string describe_gap(State s, Action a) {
  return "coverage gap: no classifier advocates " + std::string(action_name(a)) + " in state " + to_string(s);
}

inline void require_gap_free(const SystemPredictions& p) {
  if (auto gap = first_gap(p)) throw CoverageGapError(describe_gap(gap->first, gap->second));
}

/// Mean absolute error between Q* and the system predictions over S x A.
inline double q_mae(const QTable& q_star, const SystemPredictions& q_hat) {
  if (q_hat.states != q_star.states) throw std::invalid_argument("q_mae: state domains differ");
  require_gap_free(q_hat);
  double total = 0.0;
  for (std::size_t k = 0; k < q_star.size(); ++k)
    for (std::size_t i = 0; i < kNumActions; ++i) total += std::abs(q_star.values[k][i] - *q_hat.values[k][i]);
  return total / static_cast<double>(q_star.size() * kNumActions);
}

inline double q_mae(const QTable& q_star, const QTable& q_hat) { return q_mae(q_star, from_qtable(q_hat)); }

/// 1 iff the estimate advocates at least one of the reference actions.
inline int correctness(const Advocacy& a_star, const Advocacy& a_hat) { return (a_star & a_hat).any() ? 1 : 0; }

inline double policy_accuracy(const AdvocacyPolicy& pi_star, const AdvocacyPolicy& pi_hat) {
  if (pi_star.states != pi_hat.states) throw std::invalid_argument("policy_accuracy: state domains differ");
  if (pi_star.states.empty()) throw std::invalid_argument("policy_accuracy: empty policy");
  int correct = 0;
  for (std::size_t k = 0; k < pi_star.states.size(); ++k) correct += correctness(pi_star.vectors[k], pi_hat.vectors[k]);
  return static_cast<double>(correct) / static_cast<double>(pi_star.states.size());
}

/// Exact-argmax advocacy over the actions that have predictions; a state
/// with no predictions advocates nothing.
inline AdvocacyPolicy system_advocacy(const SystemPredictions& p) {
  AdvocacyPolicy out{p.states, {}};
  for (const auto& pa : p.values) {
    Advocacy bits;
    if (xcsf::present_actions(pa).size() > 0) {
      const double best = xcsf::max_prediction(pa);
      for (std::size_t i = 0; i < kNumActions; ++i) bits[i] = pa[i] && *pa[i] == best;
    }
    out.vectors.push_back(bits);
  }
  return out;
}

struct EvalReport {
  double mae = std::numeric_limits<double>::quiet_NaN();  // NaN while gaps remain
  double policy_accuracy = 0.0;
  std::size_t macro_count = 0;
  std::size_t micro_count = 0;
  std::vector<int> per_state_correct;
  AdvocacyPolicy pi_hat;
};

inline EvalReport evaluate(const xcsf::Population& pop, const GridWorld& world, const QTable& q_star,
                           const AdvocacyPolicy& pi_star) {
  const auto predictions = system_predictions(pop, world);
  EvalReport report;
  if (!first_gap(predictions)) report.mae = q_mae(q_star, predictions);
  report.pi_hat = system_advocacy(predictions);
  for (std::size_t k = 0; k < pi_star.states.size(); ++k)
    report.per_state_correct.push_back(correctness(pi_star.vectors[k], report.pi_hat.vectors[k]));
  report.policy_accuracy = policy_accuracy(pi_star, report.pi_hat);
  report.macro_count = pop.macro_count();
  report.micro_count = pop.micro_count();
  return report;
}

/// Per-state fraction of instances whose policy was correct.
inline std::vector<double> optimal_action_frequency(const std::vector<std::vector<int>>& per_state_correct) {
  if (per_state_correct.empty()) throw std::invalid_argument("optimal_action_frequency: no instances");
  std::vector<double> freq(per_state_correct.front().size(), 0.0);
  for (const auto& instance : per_state_correct) {
    if (instance.size() != freq.size()) throw std::invalid_argument("optimal_action_frequency: ragged input");
    for (std::size_t k = 0; k < freq.size(); ++k) freq[k] += instance[k];
  }
  for (auto& f : freq) f /= static_cast<double>(per_state_correct.size());
  return freq;
}

/// Per-state counts of advocated actions across instances.
inline std::vector<std::array<int, kNumActions>> action_prediction_tally(const std::vector<AdvocacyPolicy>& policies) {
  if (policies.empty()) return {};
  std::vector<std::array<int, kNumActions>> tally(policies.front().states.size());
  for (const auto& pi : policies)
    for (std::size_t k = 0; k < tally.size(); ++k)
      for (std::size_t i = 0; i < kNumActions; ++i) tally[k][i] += pi.vectors.at(k)[i] ? 1 : 0;
  return tally;
}

}  // namespace lcsrl
