#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "lcsrl/csv.hpp"
#include "lcsrl/env.hpp"
#include "lcsrl/errors.hpp"

namespace lcsrl {

using ActionValues = std::array<double, kNumActions>;

/// Bit i set means action kActions[i] is advocated.
using Advocacy = std::bitset<kNumActions>;

/// Q-values over the non-terminal states of a world, aligned with
/// GridWorld::nonterminal_states().
struct QTable {
  std::vector<State> states;
  std::vector<ActionValues> values;
  double gamma = 0.0;

  static QTable zeros(const GridWorld& world) {
    return QTable{world.nonterminal_states(), std::vector<ActionValues>(world.nonterminal_states().size()),
                  world.gamma()};
  }

  std::size_t size() const noexcept { return states.size(); }

  const ActionValues& at(State s) const {
    const auto it = std::find(states.begin(), states.end(), s);
    if (it == states.end()) throw std::out_of_range("QTable has no entry for " + to_string(s));
    return values[static_cast<std::size_t>(it - states.begin())];
  }
  double at(State s, Action a) const { return at(s)[index_of(a)]; }
};

struct AdvocacyPolicy {
  std::vector<State> states;
  std::vector<Advocacy> vectors;

  const Advocacy& at(State s) const {
    const auto it = std::find(states.begin(), states.end(), s);
    if (it == states.end()) throw std::out_of_range("policy has no entry for " + to_string(s));
    return vectors[static_cast<std::size_t>(it - states.begin())];
  }
};

inline double state_value(const ActionValues& v) { return *std::max_element(v.begin(), v.end()); }

/// One synchronous Bellman optimality sweep. Terminal successors contribute 0.
inline QTable bellman_backup(const GridWorld& world, const QTable& q) {
  QTable next = q;
  const auto& states = world.nonterminal_states();
  for (std::size_t k = 0; k < states.size(); ++k) {
    for (Action a : kActions) {
      const auto& succ = world.successors(states[k], a);
      double total = 0.0;
      for (std::size_t i = 0; i < succ.count; ++i) {
        const auto& o = succ.outcomes[i];
        const double reward = world.cell(o.next) == Cell::Goal ? 1.0 : 0.0;
        const auto slot = world.state_index(o.next);
        const double future = slot ? state_value(q.values[*slot]) : 0.0;
        total += o.probability * (reward + world.gamma() * future);
      }
      next.values[k][index_of(a)] = total;
    }
  }
  return next;
}

inline double sup_norm_change(const QTable& a, const QTable& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < kNumActions; ++i) worst = std::max(worst, std::abs(a.values[k][i] - b.values[k][i]));
  return worst;
}

/// Solves for Q* by value iteration from the zero table; stops once a sweep
/// changes no entry by tol or more.
inline QTable value_iteration(const GridWorld& world, double tol = 1e-12, std::size_t max_sweeps = 1'000'000) {
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
  QTable q = QTable::zeros(world);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    QTable next = bellman_backup(world, q);
    const double change = sup_norm_change(q, next);
    q = std::move(next);
    if (change < tol) return q;
  }
  throw ConvergenceError("value_iteration did not converge within " + std::to_string(max_sweeps) + " sweeps");
}

/// Advocates every action within tie_tol of the state's best value.
inline Advocacy advocacy_of(const ActionValues& values, double tie_tol) {
  const double best = state_value(values);
  Advocacy bits;
  for (std::size_t i = 0; i < kNumActions; ++i) bits[i] = values[i] >= best - tie_tol;
  return bits;
}

inline AdvocacyPolicy greedy_advocacy(const QTable& q, double tie_tol) {
  if (tie_tol < 0.0) throw std::invalid_argument("greedy_advocacy: tie_tol must be nonnegative");
  AdvocacyPolicy policy{q.states, {}};
  policy.vectors.reserve(q.size());
  for (const auto& v : q.values) policy.vectors.push_back(advocacy_of(v, tie_tol));
  return policy;
}

inline void write_qtable_csv(std::ostream& out, const QTable& q) {
  CsvWriter csv(out, {"qtable", 1}, {"x", "y", "action", "value"});
  for (std::size_t k = 0; k < q.size(); ++k)
    for (Action a : kActions) csv.row(q.states[k].x, q.states[k].y, action_name(a), q.values[k][index_of(a)]);
}

inline std::string advocacy_string(const Advocacy& bits) {
  std::string out;
  for (std::size_t i = 0; i < kNumActions; ++i) out += bits[i] ? '1' : '0';
  return out;
}

inline void write_policy_csv(std::ostream& out, const AdvocacyPolicy& policy) {
  CsvWriter csv(out, {"policy", 1}, {"x", "y", "advocacy"});
  for (std::size_t k = 0; k < policy.states.size(); ++k)
    csv.row(policy.states[k].x, policy.states[k].y, advocacy_string(policy.vectors[k]));
}

}  // namespace lcsrl
