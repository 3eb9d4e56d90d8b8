#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "lcsrl/env.hpp"
#include "lcsrl/errors.hpp"
#include "lcsrl/metrics.hpp"
#include "lcsrl/xcsf/classifier.hpp"
#include "lcsrl/xcsf/engine.hpp"

namespace lcsrl::compaction {

using xcsf::Classifier;
using xcsf::Population;

inline double mass_fit(const Classifier& c) { return c.fitness; }
inline double mass_tan(const Classifier& c) { return c.fitness * c.numerosity * c.generality; }
inline double mass_inv_fit(const Classifier& c) { return 1.0 / c.fitness; }

/// Quality weighting of a classifier inside a niche; must be positive.
struct MassFunction {
  std::string name;
  std::function<double(const Classifier&)> evaluate;

  double operator()(const Classifier& c) const { return evaluate(c); }
};

inline const std::vector<std::string>& mass_names() {
  static const std::vector<std::string> names = {"fit", "tan", "inv_fit"};
  return names;
}

inline MassFunction mass_by_name(std::string_view name) {
  if (name == "fit") return {"fit", mass_fit};
  if (name == "tan") return {"tan", mass_tan};
  if (name == "inv_fit") return {"inv_fit", mass_inv_fit};
  throw std::invalid_argument("unknown mass function '" + std::string(name) + "' (expected fit, tan or inv_fit)");
}

struct CompactionConfig {
  MassFunction mass;
  double rho = 0.0;
};

/// rho in {0, 0.01, ..., 0.99}.
inline std::vector<double> default_rho_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back(i / 100.0);
  return grid;
}

namespace detail {

struct Ranked {
  std::size_t index;
  double mass;
};

// Descending mass, then higher numerosity, then higher experience, then
// earlier insertion.
inline bool heavier(const Ranked& a, const Ranked& b, const Population& pop) {
  if (a.mass != b.mass) return a.mass > b.mass;
  const auto& ca = pop.members[a.index];
  const auto& cb = pop.members[b.index];
  if (ca.numerosity != cb.numerosity) return ca.numerosity > cb.numerosity;
  if (ca.experience != cb.experience) return ca.experience > cb.experience;
  return ca.id < cb.id;
}

}  // namespace detail

/// Ids of the macroclassifiers that survive greedy niche mass compaction.
inline std::unordered_set<std::uint64_t> gnmc_keep_set(const Population& pop, const GridWorld& world,
                                                       const CompactionConfig& cfg) {
  if (!(cfg.rho >= 0.0 && cfg.rho < 1.0)) throw std::invalid_argument("gnmc: rho must lie in [0,1)");
  std::vector<double> masses;
  masses.reserve(pop.members.size());
  for (const auto& c : pop.members) {
    const double m = cfg.mass(c);
    if (!(m > 0.0)) throw std::invalid_argument("gnmc: mass function '" + cfg.mass.name + "' returned a non-positive mass");
    masses.push_back(m);
  }

  std::unordered_set<std::uint64_t> keep;
  for (State s : world.nonterminal_states()) {
    const auto input = xcsf::to_input(s);
    const auto match = xcsf::match_indices(pop, input);
    for (Action a : kActions) {
      std::vector<detail::Ranked> niche;
      for (auto k : match)
        if (pop.members[k].action == a) niche.push_back({k, masses[k]});
      if (niche.empty()) throw CoverageGapError(describe_gap(s, a));
      std::sort(niche.begin(), niche.end(),
                [&](const auto& x, const auto& y) { return detail::heavier(x, y, pop); });

      double total = 0.0;
      for (const auto& r : niche) total += r.mass;
      const double target = (1.0 - cfg.rho) * total;
      double current = 0.0;
      for (std::size_t j = 0; j < niche.size() && current < target; ++j) {
        keep.insert(pop.members[niche[j].index].id);
        current += niche[j].mass;
      }
    }
  }
  return keep;
}

/// Removes every macroclassifier outside the keep set. Survivors are left
/// untouched and keep their relative order.
inline Population gnmc(const Population& pop, const GridWorld& world, const CompactionConfig& cfg) {
  const auto keep = gnmc_keep_set(pop, world, cfg);
  Population out = pop;
  std::erase_if(out.members, [&](const Classifier& c) { return !keep.contains(c.id); });
  return out;
}

}  // namespace lcsrl::compaction
