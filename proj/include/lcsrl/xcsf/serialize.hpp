#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "lcsrl/errors.hpp"
#include "lcsrl/xcsf/classifier.hpp"

namespace lcsrl::xcsf {

// Line-delimited JSON: one header object, then one object per macroclassifier.
inline constexpr std::string_view kPopulationSchema = "lcsrl-population";
inline constexpr int kPopulationSchemaVersion = 1;

inline nlohmann::ordered_json to_json(const Classifier& c) {
  nlohmann::ordered_json j;
  j["id"] = c.id;
  j["mins"] = c.condition.mins;
  j["spans"] = c.condition.spans;
  j["action"] = index_of(c.action);
  j["weights"] = c.weights;
  j["epsilon"] = c.error;
  j["mu"] = c.mu;
  j["fitness"] = c.fitness;
  j["numerosity"] = c.numerosity;
  j["experience"] = c.experience;
  j["as_est"] = c.as_est;
  j["ts"] = c.ts;
  j["generality"] = c.generality;
  return j;
}

inline Classifier classifier_from_json(const nlohmann::ordered_json& j) {
  Classifier c;
  c.id = j.at("id").get<std::uint64_t>();
  c.condition.mins = j.at("mins").get<std::array<int, kDims>>();
  c.condition.spans = j.at("spans").get<std::array<int, kDims>>();
  const auto action = j.at("action").get<std::size_t>();
  if (action >= kNumActions) throw FormatError("classifier action out of range");
  c.action = action_at(action);
  c.weights = j.at("weights").get<Weights>();
  c.error = j.at("epsilon").get<double>();
  c.mu = j.at("mu").get<double>();
  c.fitness = j.at("fitness").get<double>();
  c.numerosity = j.at("numerosity").get<int>();
  c.experience = j.at("experience").get<std::int64_t>();
  c.as_est = j.at("as_est").get<double>();
  c.ts = j.at("ts").get<std::int64_t>();
  c.generality = j.at("generality").get<double>();
  if (c.numerosity < 1) throw FormatError("classifier numerosity must be positive");
  return c;
}

inline void write_population(std::ostream& out, const Population& pop) {
  nlohmann::ordered_json header;
  header["schema"] = kPopulationSchema;
  header["version"] = kPopulationSchemaVersion;
  header["domain_max"] = pop.domain.max;
  header["capacity"] = pop.capacity;
  header["x0"] = pop.x0;
  header["next_id"] = pop.next_id;
  out << header.dump() << '\n';
  for (const auto& c : pop.members) out << to_json(c).dump() << '\n';
}

inline Population read_population(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("population file is empty");
  Population pop;
  try {
    const auto header = nlohmann::ordered_json::parse(line);
    if (header.at("schema").get<std::string>() != kPopulationSchema ||
        header.at("version").get<int>() != kPopulationSchemaVersion)
      throw FormatError("unsupported population schema");
    pop.domain.max = header.at("domain_max").get<std::array<int, kDims>>();
    pop.capacity = header.at("capacity").get<std::size_t>();
    pop.x0 = header.at("x0").get<double>();
    pop.next_id = header.at("next_id").get<std::uint64_t>();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto c = classifier_from_json(nlohmann::ordered_json::parse(line));
      if (!pop.members.empty() && c.id <= pop.members.back().id)
        throw FormatError("population line " + std::to_string(lineno) + ": ids must increase");
      pop.members.push_back(c);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed population file: ") + e.what());
  }
  return pop;
}

inline void save_population(const std::filesystem::path& path, const Population& pop) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write population file " + path.string());
  write_population(out, pop);
}

inline Population load_population(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open population file " + path.string());
  return read_population(in);
}

}  // namespace lcsrl::xcsf
