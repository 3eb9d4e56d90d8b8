#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "lcsrl/random.hpp"
#include "lcsrl/xcsf/classifier.hpp"
#include "lcsrl/xcsf/hyperparams.hpp"

namespace lcsrl::xcsf {

using PredictionArray = std::array<std::optional<double>, kNumActions>;

inline Population make_population(const Domain& domain, const Hyperparams& hp) {
  return Population{domain, hp.population_size, hp.x0, {}, 0};
}

inline std::vector<std::size_t> match_indices(const Population& pop, const Input& s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pop.members.size(); ++i)
    if (matches(pop.members[i].condition, s, pop.domain)) out.push_back(i);
  return out;
}

inline std::vector<std::size_t> action_subset(const Population& pop, std::span<const std::size_t> match, Action a) {
  std::vector<std::size_t> out;
  for (auto k : match)
    if (pop.members[k].action == a) out.push_back(k);
  return out;
}

// ---------------------------------------------------------------------------
// Deletion

inline double deletion_vote(const Classifier& c, double mean_fitness, const Hyperparams& hp) {
  const double vote = c.as_est * c.numerosity;
  const double micro_fitness = c.fitness / c.numerosity;
  if (static_cast<double>(c.experience) > hp.theta_del && micro_fitness < hp.delta * mean_fitness)
    return vote * mean_fitness / micro_fitness;
  return vote;
}

/// Removes one microclassifier chosen by roulette wheel over deletion votes.
inline void delete_one(Population& pop, const Hyperparams& hp, Rng& rng) {
  double fitness_sum = 0.0;
  for (const auto& c : pop.members) fitness_sum += c.fitness;
  const double mean_fitness = fitness_sum / static_cast<double>(pop.micro_count());

  std::vector<double> votes;
  votes.reserve(pop.members.size());
  for (const auto& c : pop.members) votes.push_back(deletion_vote(c, mean_fitness, hp));
  const std::size_t victim = rng.roulette(votes);
  if (--pop.members[victim].numerosity == 0)
    pop.members.erase(pop.members.begin() + static_cast<std::ptrdiff_t>(victim));
}

/// Deletes microclassifiers until the population is back within its cap.
inline void delete_from_population(Population& pop, const Hyperparams& hp, Rng& rng) {
  std::size_t micro = pop.micro_count();
  while (micro > pop.capacity) {
    delete_one(pop, hp, rng);
    --micro;
  }
}

// ---------------------------------------------------------------------------
// Covering and matching

inline Classifier cover(const Population& pop, const Input& s, Action a, std::int64_t t, const Hyperparams& hp,
                        Rng& rng) {
  Classifier c;
  for (std::size_t i = 0; i < kDims; ++i) {
    const int below = static_cast<int>(rng.uniform_int(0, hp.r0));
    const int above = static_cast<int>(rng.uniform_int(0, hp.r0));
    c.condition.mins[i] = s[i] - below;
    c.condition.spans[i] = below + above;
    // pulling a clipped min back onto the grid shortens the span by the same amount
    if (c.condition.mins[i] < 0) {
      c.condition.spans[i] += c.condition.mins[i];
      c.condition.mins[i] = 0;
    }
  }
  normalize(c.condition, pop.domain);
  c.action = a;
  c.weights = {};
  c.error = hp.eps_init;
  c.mu = 0.0;
  c.fitness = hp.fitness_init;
  c.numerosity = 1;
  c.experience = 0;
  c.as_est = 1.0;
  c.ts = t;
  c.generality = generality(c.condition, pop.domain, hp.generality);
  return c;
}

/// Match set for s, covering missing actions until theta_mna distinct
/// actions are present.
inline std::vector<std::size_t> generate_match_set(Population& pop, const Input& s, std::int64_t t,
                                                   const Hyperparams& hp, Rng& rng) {
  auto match = match_indices(pop, s);
  for (;;) {
    std::array<bool, kNumActions> present{};
    for (auto k : match) present[index_of(pop.members[k].action)] = true;
    std::vector<Action> missing;
    for (Action a : kActions)
      if (!present[index_of(a)]) missing.push_back(a);
    if (kNumActions - missing.size() >= hp.theta_mna) return match;

    const Action a = missing[rng.index(missing.size())];
    pop.insert(cover(pop, s, a, t, hp, rng));
    delete_from_population(pop, hp, rng);
    match = match_indices(pop, s);
  }
}

// ---------------------------------------------------------------------------
// Performance component

/// Fitness-weighted system prediction per action over macroclassifiers.
inline PredictionArray prediction_array(const Population& pop, std::span<const std::size_t> match, const Input& s) {
  std::array<double, kNumActions> weighted{};
  std::array<double, kNumActions> fitness{};
  std::array<bool, kNumActions> present{};
  for (auto k : match) {
    const auto& c = pop.members[k];
    const auto i = index_of(c.action);
    weighted[i] += predict(c, s, pop.x0) * c.fitness;
    fitness[i] += c.fitness;
    present[i] = true;
  }
  PredictionArray out;
  for (std::size_t i = 0; i < kNumActions; ++i)
    if (present[i]) out[i] = weighted[i] / fitness[i];
  return out;
}

inline double max_prediction(const PredictionArray& pa) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pa)
    if (p) best = std::max(best, *p);
  return best;
}

inline std::vector<Action> present_actions(const PredictionArray& pa) {
  std::vector<Action> out;
  for (std::size_t i = 0; i < kNumActions; ++i)
    if (pa[i]) out.push_back(action_at(i));
  return out;
}

/// Epsilon-greedy selection; greedy ties are broken uniformly at random.
inline Action select_action(const PredictionArray& pa, double explore_rate, Rng& rng) {
  const auto present = present_actions(pa);
  if (present.empty()) throw std::invalid_argument("select_action: empty prediction array");
  if (rng.bernoulli(explore_rate)) return present[rng.index(present.size())];
  const double best = max_prediction(pa);
  std::vector<Action> winners;
  for (Action a : present)
    if (*pa[index_of(a)] == best) winners.push_back(a);
  return winners.size() == 1 ? winners.front() : winners[rng.index(winners.size())];
}

// ---------------------------------------------------------------------------
// Reinforcement

inline double accuracy(double adjusted_error, const Hyperparams& hp) {
  if (adjusted_error < hp.eps0) return 1.0;
  return hp.alpha * std::pow(adjusted_error / hp.eps0, -hp.nu);
}

// Widrow-Hoff step that falls back to a running mean while experience < 1/rate.
inline void mam_update(double& value, double target, std::int64_t experience, double rate) {
  if (static_cast<double>(experience) < 1.0 / rate)
    value += (target - value) / static_cast<double>(experience);
  else
    value += rate * (target - value);
}

inline void update_fitness(Population& pop, std::span<const std::size_t> set, const Hyperparams& hp) {
  std::vector<double> kappa;
  kappa.reserve(set.size());
  double total = 0.0;
  for (auto k : set) {
    const auto& c = pop.members[k];
    kappa.push_back(accuracy(adjusted_error(c, hp), hp));
    total += kappa.back() * c.numerosity;
  }
  for (std::size_t j = 0; j < set.size(); ++j) {
    auto& c = pop.members[set[j]];
    const double relative = kappa[j] * c.numerosity / total;
    c.fitness += hp.beta * (relative - c.fitness);
  }
}

/// Updates the action set toward target P observed at input s.
inline void reinforce(Population& pop, std::span<const std::size_t> set, const Input& s, double target,
                      const Hyperparams& hp) {
  if (set.empty()) return;
  const auto x = augmented(s, pop.x0);
  double norm_sq = 0.0;
  for (double v : x) norm_sq += v * v;

  int set_numerosity = 0;
  for (auto k : set) set_numerosity += pop.members[k].numerosity;

  for (auto k : set) {
    auto& c = pop.members[k];
    ++c.experience;
    const double before = predict(c.weights, s, pop.x0);
    const double step = hp.eta / norm_sq * (target - before);
    for (std::size_t i = 0; i < x.size(); ++i) c.weights[i] += step * x[i];
    mam_update(c.error, std::abs(target - before), c.experience, hp.beta);
    mam_update(c.as_est, static_cast<double>(set_numerosity), c.experience, hp.beta);
  }

  double min_error = std::numeric_limits<double>::infinity();
  for (auto k : set) min_error = std::min(min_error, pop.members[k].error);
  for (auto k : set) {
    auto& c = pop.members[k];
    mam_update(c.mu, min_error, c.experience, hp.beta_mu);
  }

  update_fitness(pop, set, hp);
}

// ---------------------------------------------------------------------------
// Subsumption

inline bool could_subsume(const Classifier& c, const Hyperparams& hp) {
  return static_cast<double>(c.experience) > hp.theta_sub && adjusted_error(c, hp) < hp.eps0;
}

inline bool does_subsume(const Classifier& general, const Classifier& specific, const Domain& d,
                         const Hyperparams& hp) {
  return general.action == specific.action && could_subsume(general, hp) &&
         covers(general.condition, specific.condition, d);
}

/// Folds every set member covered by the most general capable subsumer into it.
inline void action_set_subsumption(Population& pop, std::span<const std::size_t> set, const Hyperparams& hp) {
  std::optional<std::size_t> best;
  for (auto k : set) {
    const auto& c = pop.members[k];
    if (!could_subsume(c, hp)) continue;
    if (!best || c.generality > pop.members[*best].generality) best = k;
  }
  if (!best) return;
  std::vector<std::uint64_t> doomed;
  for (auto k : set) {
    if (k == *best) continue;
    auto& c = pop.members[k];
    if (covers(pop.members[*best].condition, c.condition, pop.domain)) {
      pop.members[*best].numerosity += c.numerosity;
      doomed.push_back(c.id);
    }
  }
  std::erase_if(pop.members, [&](const Classifier& c) {
    return std::find(doomed.begin(), doomed.end(), c.id) != doomed.end();
  });
}

// ---------------------------------------------------------------------------
// Genetic algorithm

inline bool ga_due(const Population& pop, std::span<const std::size_t> set, std::int64_t t, const Hyperparams& hp) {
  if (set.empty()) return false;
  double weighted = 0.0;
  double count = 0.0;
  for (auto k : set) {
    weighted += static_cast<double>(pop.members[k].ts) * pop.members[k].numerosity;
    count += pop.members[k].numerosity;
  }
  return static_cast<double>(t) - weighted / count > hp.theta_ga;
}

/// Each microclassifier enters the tournament with probability tau, so a
/// macroclassifier takes part with probability 1 - (1 - tau)^numerosity. The
/// entrant with the highest per-micro fitness wins. Empty draws are retried.
inline std::size_t tournament(const Population& pop, std::span<const std::size_t> set, const Hyperparams& hp,
                              Rng& rng) {
  for (;;) {
    std::optional<std::size_t> winner;
    double best = -std::numeric_limits<double>::infinity();
    for (auto k : set) {
      const auto& c = pop.members[k];
      const double enter = 1.0 - std::pow(1.0 - hp.tau, c.numerosity);
      if (!rng.bernoulli(enter)) continue;
      const double micro_fitness = c.fitness / c.numerosity;
      if (!winner || micro_fitness > best) {
        winner = k;
        best = micro_fitness;
      }
    }
    if (winner) return *winner;
  }
}

/// Uniform crossover over the allele sequence (min_1, span_1, ..., min_d, span_d).
inline bool uniform_crossover(IntervalCondition& a, IntervalCondition& b, double swap_rate, Rng& rng) {
  bool changed = false;
  for (std::size_t i = 0; i < kDims; ++i) {
    if (rng.bernoulli(swap_rate)) {
      std::swap(a.mins[i], b.mins[i]);
      changed = true;
    }
    if (rng.bernoulli(swap_rate)) {
      std::swap(a.spans[i], b.spans[i]);
      changed = true;
    }
  }
  return changed;
}

/// Nonzero integer perturbation in [-m0, m0].
inline int mutation_offset(int m0, Rng& rng) {
  const int magnitude = static_cast<int>(rng.uniform_int(1, m0));
  return rng.bernoulli(0.5) ? magnitude : -magnitude;
}

inline void mutate(Classifier& c, const Domain& d, const Hyperparams& hp, Rng& rng) {
  for (std::size_t i = 0; i < kDims; ++i) {
    if (rng.bernoulli(hp.mutation_rate)) c.condition.mins[i] += mutation_offset(hp.m0, rng);
    if (rng.bernoulli(hp.mutation_rate)) c.condition.spans[i] += mutation_offset(hp.m0, rng);
  }
  normalize(c.condition, d);
  if (rng.bernoulli(hp.mutation_rate)) {
    const auto shift = 1 + rng.index(kNumActions - 1);
    c.action = action_at((index_of(c.action) + shift) % kNumActions);
  }
}

inline Classifier make_offspring(const Classifier& parent, std::int64_t t) {
  Classifier child = parent;
  child.numerosity = 1;
  child.experience = 0;
  child.ts = t;
  return child;
}

/// One GA invocation on an action set: selection, crossover, mutation,
/// subsumption or insertion, then deletion down to the cap.
inline void run_ga(Population& pop, std::span<const std::size_t> set, std::int64_t t, const Hyperparams& hp,
                   Rng& rng) {
  if (set.empty()) return;
  for (auto k : set) pop.members[k].ts = t;

  const std::size_t p1 = tournament(pop, set, hp, rng);
  const std::size_t p2 = tournament(pop, set, hp, rng);
  std::array<Classifier, 2> children = {make_offspring(pop.members[p1], t), make_offspring(pop.members[p2], t)};

  if (rng.bernoulli(hp.chi)) {
    uniform_crossover(children[0].condition, children[1].condition, hp.upsilon, rng);
    const auto& a = pop.members[p1];
    const auto& b = pop.members[p2];
    for (auto& child : children) {
      for (std::size_t i = 0; i < child.weights.size(); ++i) child.weights[i] = (a.weights[i] + b.weights[i]) / 2.0;
      child.error = (a.error + b.error) / 2.0;
      child.mu = (a.mu + b.mu) / 2.0;
      child.fitness = (a.fitness + b.fitness) / 2.0;
    }
  }

  for (auto& child : children) {
    child.fitness *= 0.1;
    mutate(child, pop.domain, hp, rng);
    child.generality = generality(child.condition, pop.domain, hp.generality);
  }

  // parents are referenced by id; insertion may reallocate members
  const std::uint64_t id1 = pop.members[p1].id;
  const std::uint64_t id2 = pop.members[p2].id;
  for (auto& child : children) {
    if (hp.ga_subsumption) {
      bool absorbed = false;
      for (auto id : {id1, id2}) {
        const auto k = pop.find(id);
        if (k && does_subsume(pop.members[*k], child, pop.domain, hp)) {
          ++pop.members[*k].numerosity;
          absorbed = true;
          break;
        }
      }
      if (absorbed) continue;
    }
    pop.insert(child);
  }
  delete_from_population(pop, hp, rng);
}

}  // namespace lcsrl::xcsf
