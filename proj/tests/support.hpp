#pragma once

// Test-only oracles and generators. Nothing here calls into the code paths
// it is used to check.

#include <cmath>
#include <deque>
#include <set>
#include <tuple>
#include <vector>

#include "lcsrl/env.hpp"
#include "lcsrl/random.hpp"
#include "lcsrl/xcsf/classifier.hpp"

namespace lcsrl::test_support {

/// BFS distance (in moves) from every cell to the goal under deterministic
/// moves through frozen cells; -1 when unreachable.
inline std::vector<std::vector<int>> bfs_goal_distance(const GridWorld& w) {
  std::vector<std::vector<int>> dist(w.height(), std::vector<int>(w.width(), -1));
  std::deque<State> queue;
  dist[w.goal().y][w.goal().x] = 0;
  queue.push_back(w.goal());
  const int dx[] = {-1, 0, 1, 0};
  const int dy[] = {0, 1, 0, -1};
  while (!queue.empty()) {
    const State cur = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      const State prev{cur.x + dx[d], cur.y + dy[d]};
      if (prev.x < 0 || prev.y < 0 || prev.x >= w.width() || prev.y >= w.height()) continue;
      if (w.is_terminal(prev) || dist[prev.y][prev.x] >= 0) continue;
      dist[prev.y][prev.x] = dist[cur.y][cur.x] + 1;
      queue.push_back(prev);
    }
  }
  return dist;
}

/// Cell count covered by the truncated condition, by enumeration.
inline double enumerated_generality(const xcsf::IntervalCondition& c, const xcsf::Domain& d) {
  std::size_t covered = 0;
  for (int y = 0; y <= d.max[1]; ++y)
    for (int x = 0; x <= d.max[0]; ++x) {
      const int lo0 = c.mins[0], hi0 = std::min(c.mins[0] + c.spans[0], d.max[0]);
      const int lo1 = c.mins[1], hi1 = std::min(c.mins[1] + c.spans[1], d.max[1]);
      if (x >= lo0 && x <= hi0 && y >= lo1 && y <= hi1) ++covered;
    }
  return static_cast<double>(covered) / static_cast<double>(d.cell_count());
}

inline xcsf::Classifier random_classifier(const xcsf::Domain& d, Rng& rng, std::uint64_t id) {
  xcsf::Classifier c;
  for (std::size_t i = 0; i < xcsf::kDims; ++i) {
    c.condition.mins[i] = static_cast<int>(rng.uniform_int(0, d.max[i]));
    c.condition.spans[i] = static_cast<int>(rng.uniform_int(0, d.max[i] - c.condition.mins[i]));
  }
  c.action = action_at(rng.index(kNumActions));
  for (auto& w : c.weights) w = (rng.uniform() - 0.5) * 0.1;
  c.error = rng.uniform() * 0.05;
  c.mu = rng.uniform() * 0.01;
  c.fitness = 0.001 + 0.999 * rng.uniform();
  c.numerosity = static_cast<int>(rng.uniform_int(1, 20));
  c.experience = rng.uniform_int(0, 5000);
  c.as_est = 1.0 + 30.0 * rng.uniform();
  c.ts = rng.uniform_int(0, 100000);
  c.generality = enumerated_generality(c.condition, d);
  c.id = id;
  return c;
}

/// Random population in which every (s, a) over the world's non-terminal
/// states has at least one advocate.
inline xcsf::Population synthetic_population(const GridWorld& w, std::uint64_t seed, std::size_t extra = 150) {
  Rng rng(seed);
  xcsf::Population pop;
  pop.domain = xcsf::Domain::of(w);
  pop.capacity = 100000;
  pop.x0 = 10.0;
  auto push = [&](xcsf::Classifier c) {
    for (const auto& m : pop.members)
      if (m.same_rule(c)) return;
    c.id = pop.next_id++;
    pop.members.push_back(c);
  };
  for (std::size_t i = 0; i < extra; ++i) push(random_classifier(pop.domain, rng, 0));
  for (State s : w.nonterminal_states()) {
    for (Action a : kActions) {
      bool covered = false;
      for (const auto& m : pop.members)
        covered |= m.action == a && xcsf::matches(m.condition, xcsf::to_input(s), pop.domain);
      while (!covered) {
        auto c = random_classifier(pop.domain, rng, 0);
        c.action = a;
        c.condition.mins = {std::max(0, s.x - static_cast<int>(rng.uniform_int(0, 2))),
                            std::max(0, s.y - static_cast<int>(rng.uniform_int(0, 2)))};
        c.condition.spans = {s.x - c.condition.mins[0] + static_cast<int>(rng.uniform_int(0, 2)),
                             s.y - c.condition.mins[1] + static_cast<int>(rng.uniform_int(0, 2))};
        xcsf::normalize(c.condition, pop.domain);
        c.generality = enumerated_generality(c.condition, pop.domain);
        const auto before = pop.members.size();
        push(c);
        covered = pop.members.size() > before;
      }
    }
  }
  return pop;
}

/// Keep-set of the rule that retains, in every (state, action) niche, only
/// the classifier with the largest fitness * numerosity * generality. Ties go
/// to higher numerosity, then experience, then the older rule.
inline std::set<std::uint64_t> pdrc_keep_set(const xcsf::Population& pop, const GridWorld& w) {
  std::set<std::uint64_t> keep;
  for (State s : w.nonterminal_states()) {
    for (Action a : kActions) {
      const xcsf::Classifier* best = nullptr;
      auto key = [](const xcsf::Classifier& c) {
        return std::tuple(c.fitness * c.numerosity * c.generality, c.numerosity, c.experience,
                          -static_cast<std::int64_t>(c.id));
      };
      for (const auto& c : pop.members) {
        const bool in = c.action == a && s.x >= c.condition.mins[0] &&
                        s.x <= std::min(c.condition.mins[0] + c.condition.spans[0], pop.domain.max[0]) &&
                        s.y >= c.condition.mins[1] &&
                        s.y <= std::min(c.condition.mins[1] + c.condition.spans[1], pop.domain.max[1]);
        if (in && (!best || key(c) > key(*best))) best = &c;
      }
      if (best) keep.insert(best->id);
    }
  }
  return keep;
}

}  // namespace lcsrl::test_support
