#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "lcsrl/csv.hpp"
#include "lcsrl/env.hpp"
#include "lcsrl/errors.hpp"
#include "lcsrl/xcsf/hyperparams.hpp"

namespace lcsrl::harness {

enum class EnvVariant { Deterministic, Slip01 };

inline std::string env_name(EnvVariant v) { return v == EnvVariant::Deterministic ? "det" : "slip01"; }

inline EnvVariant parse_env(std::string_view name) {
  if (name == "det") return EnvVariant::Deterministic;
  if (name == "slip01") return EnvVariant::Slip01;
  throw std::invalid_argument("unknown env '" + std::string(name) + "' (expected det or slip01)");
}

inline double slip_of(EnvVariant v) { return v == EnvVariant::Deterministic ? 0.0 : 0.1; }

struct ExperimentConfig {
  EnvVariant env = EnvVariant::Deterministic;
  xcsf::Hyperparams hp;
  std::optional<std::int64_t> budget;  // defaults to 400k (det) / 800k (slip01)
  std::size_t trials = 30;
  std::int64_t cadence = 10'000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> map_file;

  std::int64_t effective_budget() const {
    if (budget) return *budget;
    return env == EnvVariant::Deterministic ? 400'000 : 800'000;
  }

  GridWorld world() const {
    const double p_slip = slip_of(env);
    return map_file ? GridWorld::load_map(*map_file, p_slip, hp.gamma) : GridWorld::frozen_lake_8x8(p_slip, hp.gamma);
  }

  void validate() const {
    hp.validate();
    if (effective_budget() < 0) throw std::invalid_argument("invalid budget: must be nonnegative");
    if (trials == 0) throw std::invalid_argument("invalid trials: must be positive");
    if (cadence < 0) throw std::invalid_argument("invalid cadence: must be nonnegative");
    if (workers == 0) throw std::invalid_argument("invalid workers: must be positive");
  }
};

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw FormatError("config key '" + key + "': cannot parse '" + text + "'");
  return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "True" || text == "1") return true;
  if (text == "false" || text == "False" || text == "0") return false;
  throw FormatError("config key '" + key + "': expected true or false, got '" + text + "'");
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// One accessor pair per key; the table drives parsing and echoing alike.
struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T, class Proj>
Field number_field(Proj proj) {
  return {[proj](ExperimentConfig& c, const std::string& k, const std::string& v) {
            proj(c) = parse_number<T>(k, v);
          },
          [proj](const ExperimentConfig& c) {
            const T v = proj(const_cast<ExperimentConfig&>(c));
            if constexpr (std::is_floating_point_v<T>)
              return format_real(v);
            else
              return std::to_string(v);
          }};
}

template <class Proj>
Field bool_field(Proj proj) {
  return {[proj](ExperimentConfig& c, const std::string& k, const std::string& v) { proj(c) = parse_bool(k, v); },
          [proj](const ExperimentConfig& c) {
            return std::string(proj(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
          }};
}

inline const std::vector<std::pair<std::string, Field>>& fields() {
  using C = ExperimentConfig;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"env",
       {[](C& c, const std::string&, const std::string& v) { c.env = parse_env(v); },
        [](const C& c) { return env_name(c.env); }}},
      {"budget",
       {[](C& c, const std::string& k, const std::string& v) { c.budget = parse_number<std::int64_t>(k, v); },
        [](const C& c) { return std::to_string(c.effective_budget()); }}},
      {"trials", number_field<std::size_t>([](C& c) -> std::size_t& { return c.trials; })},
      {"cadence", number_field<std::int64_t>([](C& c) -> std::int64_t& { return c.cadence; })},
      {"seed", number_field<std::uint64_t>([](C& c) -> std::uint64_t& { return c.seed; })},
      {"workers", number_field<std::size_t>([](C& c) -> std::size_t& { return c.workers; })},
      {"N", number_field<std::size_t>([](C& c) -> std::size_t& { return c.hp.population_size; })},
      {"beta", number_field<double>([](C& c) -> double& { return c.hp.beta; })},
      {"beta_eps", number_field<double>([](C& c) -> double& { return c.hp.beta_mu; })},
      {"alpha", number_field<double>([](C& c) -> double& { return c.hp.alpha; })},
      {"eps0", number_field<double>([](C& c) -> double& { return c.hp.eps0; })},
      {"nu", number_field<double>([](C& c) -> double& { return c.hp.nu; })},
      {"gamma", number_field<double>([](C& c) -> double& { return c.hp.gamma; })},
      {"theta_ga", number_field<double>([](C& c) -> double& { return c.hp.theta_ga; })},
      {"tau", number_field<double>([](C& c) -> double& { return c.hp.tau; })},
      {"chi", number_field<double>([](C& c) -> double& { return c.hp.chi; })},
      {"upsilon", number_field<double>([](C& c) -> double& { return c.hp.upsilon; })},
      {"mu_mut", number_field<double>([](C& c) -> double& { return c.hp.mutation_rate; })},
      {"theta_del", number_field<double>([](C& c) -> double& { return c.hp.theta_del; })},
      {"delta", number_field<double>([](C& c) -> double& { return c.hp.delta; })},
      {"theta_sub", number_field<double>([](C& c) -> double& { return c.hp.theta_sub; })},
      {"eps_I", number_field<double>([](C& c) -> double& { return c.hp.eps_init; })},
      {"f_I", number_field<double>([](C& c) -> double& { return c.hp.fitness_init; })},
      {"theta_mna", number_field<std::size_t>([](C& c) -> std::size_t& { return c.hp.theta_mna; })},
      {"do_ga_subsumption", bool_field([](C& c) -> bool& { return c.hp.ga_subsumption; })},
      {"do_action_set_subsumption", bool_field([](C& c) -> bool& { return c.hp.action_set_subsumption; })},
      {"r0", number_field<int>([](C& c) -> int& { return c.hp.r0; })},
      {"m0", number_field<int>([](C& c) -> int& { return c.hp.m0; })},
      {"x0", number_field<double>([](C& c) -> double& { return c.hp.x0; })},
      {"eta", number_field<double>([](C& c) -> double& { return c.hp.eta; })},
      {"explore", number_field<double>([](C& c) -> double& { return c.hp.explore_rate; })},
      {"episode_step_cap", number_field<std::size_t>([](C& c) -> std::size_t& { return c.hp.episode_step_cap; })},
      {"track_noise", bool_field([](C& c) -> bool& { return c.hp.track_noise; })},
      {"generality",
       {[](C& c, const std::string& k, const std::string& v) {
          if (v == "product")
            c.hp.generality = xcsf::GeneralityMode::Product;
          else if (v == "mean_width")
            c.hp.generality = xcsf::GeneralityMode::MeanWidth;
          else
            throw FormatError("config key '" + k + "': expected product or mean_width");
        },
        [](const C& c) {
          return std::string(c.hp.generality == xcsf::GeneralityMode::Product ? "product" : "mean_width");
        }}},
      {"map",
       {[](C& c, const std::string&, const std::string& v) { c.map_file = v; },
        [](const C& c) { return c.map_file ? c.map_file->string() : std::string(); }}},
  };
  return table;
}

}  // namespace detail

/// Applies one `key = value` setting.
inline void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, field] : detail::fields()) {
    if (name == key) {
      field.set(cfg, key, value);
      return;
    }
  }
  throw FormatError("unknown config key '" + key + "'");
}

/// Parses a flat `key = value` file; '#' starts a comment.
inline void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw FormatError(fmt::format("config line {}: expected key = value", lineno));
    const auto key = detail::trim(std::string_view(body).substr(0, eq));
    const auto value = detail::trim(std::string_view(body).substr(eq + 1));
    if (key == "map" && value.empty()) continue;
    set_key(cfg, key, value);
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg;
  apply_config_text(cfg, buf.str());
  return cfg;
}

/// Every key with its effective value, in a form apply_config_text accepts.
inline std::string config_text(const ExperimentConfig& cfg) {
  std::string out = "# lcsrl experiment configuration\n";
  for (const auto& [name, field] : detail::fields()) out += name + " = " + field.get(cfg) + "\n";
  return out;
}

}  // namespace lcsrl::harness
