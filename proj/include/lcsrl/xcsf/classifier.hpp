#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "lcsrl/env.hpp"
#include "lcsrl/xcsf/hyperparams.hpp"

namespace lcsrl::xcsf {

inline constexpr std::size_t kDims = 2;

using Input = std::array<int, kDims>;

constexpr Input to_input(State s) noexcept { return {s.x, s.y}; }

/// Inclusive upper bound of each input dimension; lower bounds are 0.
struct Domain {
  std::array<int, kDims> max{};
  friend bool operator==(const Domain&, const Domain&) = default;

  static Domain of(const GridWorld& world) { return {{world.width() - 1, world.height() - 1}}; }
  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int m : max) n *= static_cast<std::size_t>(m + 1);
    return n;
  }
};

/// Integer min-span intervals; the implied upper bound is min + span,
/// truncated to the domain.
struct IntervalCondition {
  std::array<int, kDims> mins{};
  std::array<int, kDims> spans{};
  friend bool operator==(const IntervalCondition&, const IntervalCondition&) = default;

  int lower(std::size_t i) const noexcept { return mins[i]; }
  int upper(std::size_t i, const Domain& d) const noexcept { return std::min(mins[i] + spans[i], d.max[i]); }
};

inline bool matches(const IntervalCondition& c, const Input& s, const Domain& d) noexcept {
  for (std::size_t i = 0; i < kDims; ++i)
    if (s[i] < c.lower(i) || s[i] > c.upper(i, d)) return false;
  return true;
}

/// Clamps alleles so that 0 <= min <= max_i and min + span <= max_i.
inline void normalize(IntervalCondition& c, const Domain& d) noexcept {
  for (std::size_t i = 0; i < kDims; ++i) {
    c.mins[i] = std::clamp(c.mins[i], 0, d.max[i]);
    c.spans[i] = std::clamp(c.spans[i], 0, d.max[i] - c.mins[i]);
  }
}

inline double generality(const IntervalCondition& c, const Domain& d, GeneralityMode mode) {
  double product = 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < kDims; ++i) {
    const int width = c.upper(i, d) - c.lower(i) + 1;
    const double fraction = width <= 0 ? 0.0 : static_cast<double>(width) / static_cast<double>(d.max[i] + 1);
    product *= fraction;
    sum += fraction;
  }
  return mode == GeneralityMode::Product ? product : sum / static_cast<double>(kDims);
}

/// True iff every input matched by `specific` is matched by `general`.
inline bool covers(const IntervalCondition& general, const IntervalCondition& specific, const Domain& d) noexcept {
  for (std::size_t i = 0; i < kDims; ++i)
    if (general.lower(i) > specific.lower(i) || general.upper(i, d) < specific.upper(i, d)) return false;
  return true;
}

using Weights = std::array<double, kDims + 1>;

struct Classifier {
  IntervalCondition condition;
  Action action = Action::Left;
  Weights weights{};  // bias weight first
  double error = 0.0;
  double mu = 0.0;
  double fitness = 0.0;
  int numerosity = 1;
  std::int64_t experience = 0;
  double as_est = 1.0;
  std::int64_t ts = 0;
  double generality = 1.0;
  std::uint64_t id = 0;  // creation order within its population

  bool same_rule(const Classifier& o) const noexcept { return action == o.action && condition == o.condition; }
};

/// Input vector (x0, s_1, ..., s_d).
inline Weights augmented(const Input& s, double x0) noexcept {
  Weights x{};
  x[0] = x0;
  for (std::size_t i = 0; i < kDims; ++i) x[i + 1] = static_cast<double>(s[i]);
  return x;
}

inline double predict(const Weights& w, const Input& s, double x0) noexcept {
  const auto x = augmented(s, x0);
  return std::inner_product(w.begin(), w.end(), x.begin(), 0.0);
}

inline double predict(const Classifier& c, const Input& s, double x0) noexcept { return predict(c.weights, s, x0); }

/// Error used for accuracy once the noise estimate is discounted.
inline double adjusted_error(const Classifier& c, const Hyperparams& hp) noexcept {
  return hp.track_noise ? std::max(c.error - c.mu, 0.0) : c.error;
}

/// Multiset of macroclassifiers. Members stay sorted by id: new rules are
/// appended and removals preserve order.
struct Population {
  Domain domain;
  std::size_t capacity = 0;
  double x0 = 10.0;
  std::vector<Classifier> members;
  std::uint64_t next_id = 0;

  std::size_t macro_count() const noexcept { return members.size(); }
  std::size_t micro_count() const noexcept {
    std::size_t n = 0;
    for (const auto& c : members) n += static_cast<std::size_t>(c.numerosity);
    return n;
  }

  /// Adds a rule, merging into an identical (condition, action) macroclassifier.
  /// Returns the member index the rule ended up in.
  std::size_t insert(Classifier c) {
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (members[i].same_rule(c)) {
        members[i].numerosity += c.numerosity;
        return i;
      }
    }
    c.id = next_id++;
    members.push_back(c);
    return members.size() - 1;
  }

  /// Member index for an id, if still present.
  std::optional<std::size_t> find(std::uint64_t id) const noexcept {
    const auto it = std::lower_bound(members.begin(), members.end(), id,
                                     [](const Classifier& c, std::uint64_t v) { return c.id < v; });
    if (it == members.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - members.begin());
  }

  std::vector<std::size_t> resolve(std::span<const std::uint64_t> ids) const {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (auto id : ids)
      if (auto k = find(id)) out.push_back(*k);
    return out;
  }

  std::vector<std::uint64_t> ids_of(std::span<const std::size_t> indices) const {
    std::vector<std::uint64_t> out;
    out.reserve(indices.size());
    for (auto k : indices) out.push_back(members[k].id);
    return out;
  }
};

}  // namespace lcsrl::xcsf
