#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lcsrl/errors.hpp"
#include "lcsrl/random.hpp"

namespace lcsrl {

// Fixed ordering; advocacy bit i refers to kActions[i].
enum class Action : std::uint8_t { Left = 0, Down = 1, Right = 2, Up = 3 };

inline constexpr std::size_t kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kActions = {Action::Left, Action::Down,
                                                             Action::Right, Action::Up};

constexpr std::size_t index_of(Action a) noexcept { return static_cast<std::size_t>(a); }
constexpr Action action_at(std::size_t i) noexcept { return static_cast<Action>(i); }

constexpr std::string_view action_name(Action a) noexcept {
  constexpr std::array<std::string_view, kNumActions> names = {"Left", "Down", "Right", "Up"};
  return names[index_of(a)];
}

/// Grid coordinate: (0,0) is top-left, x grows rightward, y grows downward.
struct State {
  int x = 0;
  int y = 0;
  friend constexpr auto operator<=>(const State&, const State&) = default;
};

inline std::string to_string(State s) {
  return "(" + std::to_string(s.x) + "," + std::to_string(s.y) + ")";
}

enum class Cell : std::uint8_t { Frozen, Hole, Goal };

struct Transition {
  State next;
  double reward = 0.0;
  bool terminal = false;
};

struct Outcome {
  State next;
  double probability = 0.0;
};

inline constexpr std::string_view kFrozenLake8x8 =
    "SFFFFFFF\n"
    "FFFFFFFF\n"
    "FFFHFFFF\n"
    "FFFFFHFF\n"
    "FFFHFFFF\n"
    "FHHFFFHF\n"
    "FHFFHFHF\n"
    "FFFHFFFG\n";

/// Immutable tabular gridworld MDP with FrozenLake slip dynamics.
class GridWorld {
 public:
  GridWorld(int width, int height, std::vector<Cell> layout, double p_slip, double gamma)
      : width_(width), height_(height), layout_(std::move(layout)), p_slip_(p_slip), gamma_(gamma) {
    if (width <= 0 || height <= 0 || layout_.size() != static_cast<std::size_t>(width * height))
      throw std::invalid_argument("GridWorld: layout size does not match dimensions");
    if (!(p_slip >= 0.0 && p_slip < 1.0)) throw std::invalid_argument("GridWorld: p_slip must lie in [0,1)");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("GridWorld: gamma must lie in [0,1]");
    if (std::count(layout_.begin(), layout_.end(), Cell::Goal) != 1)
      throw std::invalid_argument("GridWorld: layout needs exactly one goal cell");

    slot_.assign(layout_.size(), -1);
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        const State s{x, y};
        if (cell(s) == Cell::Frozen) {
          slot_[flat(s)] = static_cast<int>(nonterminal_.size());
          nonterminal_.push_back(s);
        } else {
          terminal_.push_back(s);
          if (cell(s) == Cell::Goal) goal_ = s;
        }
      }
    }
    build_successors();
  }

  static GridWorld from_map(std::string_view text, double p_slip, double gamma = 0.95) {
    std::vector<std::string> rows;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (!line.empty()) rows.push_back(line);
    }
    if (rows.empty()) throw FormatError("grid map is empty");
    const auto width = rows.front().size();
    std::vector<Cell> layout;
    for (std::size_t y = 0; y < rows.size(); ++y) {
      if (rows[y].size() != width)
        throw FormatError("grid map row " + std::to_string(y) + " has inconsistent width");
      for (char c : rows[y]) {
        switch (c) {
          case 'F':
          case 'S': layout.push_back(Cell::Frozen); break;
          case 'H': layout.push_back(Cell::Hole); break;
          case 'G': layout.push_back(Cell::Goal); break;
          default: throw FormatError(std::string("grid map has unknown cell label '") + c + "'");
        }
      }
    }
    return GridWorld(static_cast<int>(width), static_cast<int>(rows.size()), std::move(layout), p_slip,
                     gamma);
  }

  static GridWorld load_map(const std::filesystem::path& path, double p_slip, double gamma = 0.95) {
    std::ifstream file(path);
    if (!file) throw FormatError("cannot open grid map " + path.string());
    std::stringstream buf;
    buf << file.rdbuf();
    return from_map(buf.str(), p_slip, gamma);
  }

  static GridWorld frozen_lake_8x8(double p_slip, double gamma = 0.95) {
    return from_map(kFrozenLake8x8, p_slip, gamma);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double p_slip() const noexcept { return p_slip_; }
  double gamma() const noexcept { return gamma_; }
  State goal() const noexcept { return goal_; }

  bool in_grid(State s) const noexcept { return s.x >= 0 && s.y >= 0 && s.x < width_ && s.y < height_; }
  Cell cell(State s) const { return layout_.at(flat(s)); }
  bool is_terminal(State s) const { return cell(s) != Cell::Frozen; }

  /// Non-terminal states in row-major scan order.
  const std::vector<State>& nonterminal_states() const noexcept { return nonterminal_; }
  const std::vector<State>& terminal_states() const noexcept { return terminal_; }

  /// Position of s within nonterminal_states(), if s is non-terminal.
  std::optional<std::size_t> state_index(State s) const {
    if (!in_grid(s)) return std::nullopt;
    const int k = slot_[flat(s)];
    if (k < 0) return std::nullopt;
    return static_cast<std::size_t>(k);
  }

  /// Deterministic move; leaving the grid keeps the agent in place.
  State move(State s, Action a) const noexcept {
    State n = s;
    switch (a) {
      case Action::Left: --n.x; break;
      case Action::Down: ++n.y; break;
      case Action::Right: ++n.x; break;
      case Action::Up: --n.y; break;
    }
    return in_grid(n) ? n : s;
  }

  struct Successors {
    std::array<Outcome, 3> outcomes{};
    std::size_t count = 0;
  };

  const Successors& successors(State s, Action a) const {
    const auto k = state_index(s);
    if (!k) throw PreconditionError("successor query from terminal or off-grid state " + to_string(s));
    return successors_[*k * kNumActions + index_of(a)];
  }

 private:
  std::size_t flat(State s) const noexcept {
    return static_cast<std::size_t>(s.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(s.x);
  }

  void build_successors() {
    successors_.resize(nonterminal_.size() * kNumActions);
    for (std::size_t k = 0; k < nonterminal_.size(); ++k) {
      for (Action a : kActions) {
        auto& succ = successors_[k * kNumActions + index_of(a)];
        // intended direction, then the two perpendicular slips (a-1, a+1 mod 4)
        const std::size_t i = index_of(a);
        const std::array<std::pair<Action, double>, 3> branches = {{
            {a, 1.0 - p_slip_},
            {action_at((i + kNumActions - 1) % kNumActions), p_slip_ / 2.0},
            {action_at((i + 1) % kNumActions), p_slip_ / 2.0},
        }};
        for (const auto& [dir, mass] : branches) {
          if (mass <= 0.0) continue;
          const State next = move(nonterminal_[k], dir);
          auto* end = succ.outcomes.begin() + succ.count;
          auto* hit = std::find_if(succ.outcomes.begin(), end, [&](const Outcome& o) { return o.next == next; });
          if (hit != end) {
            hit->probability += mass;
          } else {
            succ.outcomes[succ.count++] = Outcome{next, mass};
          }
        }
      }
    }
  }

  int width_;
  int height_;
  std::vector<Cell> layout_;
  double p_slip_;
  double gamma_;
  State goal_{};
  std::vector<State> nonterminal_;
  std::vector<State> terminal_;
  std::vector<int> slot_;
  std::vector<Successors> successors_;
};

/// Next-state distribution of (s, a); identical next states are merged.
inline std::vector<Outcome> successor_distribution(const GridWorld& world, State s, Action a) {
  const auto& succ = world.successors(s, a);
  return {succ.outcomes.begin(), succ.outcomes.begin() + succ.count};
}

inline Transition step(const GridWorld& world, State s, Action a, Rng& rng) {
  const auto& succ = world.successors(s, a);
  State next = succ.outcomes[succ.count - 1].next;
  if (succ.count > 1) {
    double u = rng.uniform();
    for (std::size_t i = 0; i < succ.count; ++i) {
      u -= succ.outcomes[i].probability;
      if (u < 0.0) {
        next = succ.outcomes[i].next;
        break;
      }
    }
  }
  const bool goal = world.cell(next) == Cell::Goal;
  return Transition{next, goal ? 1.0 : 0.0, world.is_terminal(next)};
}

}  // namespace lcsrl
