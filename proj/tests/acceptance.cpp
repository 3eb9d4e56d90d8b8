// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Outputs (trained populations, CSVs) are left in ./acceptance-out.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

#include "lcsrl/compaction.hpp"
#include "lcsrl/harness/experiment.hpp"
#include "lcsrl/metrics.hpp"
#include "lcsrl/oracle.hpp"
#include "lcsrl/rollout.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace lcsrl;
using namespace lcsrl::harness;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::vector<std::string> out;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

const fs::path kOut = "acceptance-out";
constexpr std::uint64_t kSeed = 20240601;

// Trained populations shared by several criteria.
struct Corpus {
  std::vector<Instance> det;   // 5 seeds, p_slip = 0, full budget
  std::vector<Instance> slip;  // 5 seeds, p_slip = 0.1, full budget
  std::vector<std::pair<GridWorld, xcsf::Population>> extra;  // shorter runs, both worlds
};

Corpus& corpus() {
  static Corpus c;
  return c;
}

std::vector<Instance> train_five(EnvVariant env, const fs::path& dir) {
  ExperimentConfig cfg;
  cfg.env = env;
  cfg.trials = 5;
  cfg.seed = kSeed;
  cfg.out_dir = dir;
  run_training_experiment(cfg);
  return load_instances({dir});
}

// --- criteria --------------------------------------------------------------

Verdict oracle_correctness() {
  const auto t0 = Clock::now();
  const auto w = GridWorld::frozen_lake_8x8(0.0);
  const auto q = value_iteration(w);
  const auto pi = greedy_advocacy(q, 1e-9);
  const double elapsed = seconds_since(t0);

  const double v0 = state_value(q.at({0, 0}));
  bool ok = std::abs(v0 - std::pow(0.95, 13)) <= 1e-6 && advocacy_string(pi.at({0, 0})) == "0110";

  const auto dist = test_support::bfs_goal_distance(w);
  int bad_values = 0, bad_advocacy = 0;
  for (State s : w.nonterminal_states()) {
    if (std::abs(state_value(q.at(s)) - std::pow(0.95, dist[s.y][s.x] - 1)) > 1e-9) ++bad_values;
    Advocacy expected;
    for (Action a : kActions) {
      const State n = w.move(s, a);
      expected[index_of(a)] = n != s && dist[n.y][n.x] == dist[s.y][s.x] - 1;
    }
    if (pi.at(s) != expected) ++bad_advocacy;
  }
  ok = ok && bad_values == 0 && bad_advocacy == 0 && elapsed < 1.0;
  return {ok, fmt::format("V(0,0)={:.9f} (0,0)={} bfs mismatches: values {} advocacy {} time {:.3f}s", v0,
                          advocacy_string(pi.at({0, 0})), bad_values, bad_advocacy, elapsed)};
}

Verdict stochastic_dynamics() {
  const auto t0 = Clock::now();
  const auto w = GridWorld::frozen_lake_8x8(0.1);
  Rng pick(kSeed);
  Rng rng(kSeed + 1);
  const auto& states = w.nonterminal_states();
  double min_p = 1.0;
  int failures = 0;
  for (int pair = 0; pair < 20; ++pair) {
    const State s = states[pick.index(states.size())];
    const Action a = action_at(pick.index(kNumActions));
    const auto dist = successor_distribution(w, s, a);
    std::map<State, int> counts;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) ++counts[step(w, s, a, rng).next];
    double chi2 = 0.0;
    for (const auto& o : dist) {
      const double e = o.probability * n;
      chi2 += (counts[o.next] - e) * (counts[o.next] - e) / e;
    }
    int unexpected = 0;
    for (const auto& [cell, count] : counts) {
      bool listed = false;
      for (const auto& o : dist) listed = listed || o.next == cell;
      if (!listed) unexpected += count;
    }
    const boost::math::chi_squared chi(static_cast<double>(dist.size() - 1));
    const double p = boost::math::cdf(boost::math::complement(chi, chi2));
    min_p = std::min(min_p, p);
    if (!(p > 0.01) || unexpected > 0) ++failures;
  }
  const double elapsed = seconds_since(t0);
  return {failures == 0 && elapsed < 5.0,
          fmt::format("20 pairs, failures {} min p {:.4f} time {:.2f}s", failures, min_p, elapsed)};
}

Verdict deterministic_training() {
  const auto t0 = Clock::now();
  auto& c = corpus();
  c.det = train_five(EnvVariant::Deterministic, kOut / "det");
  const auto oracle = Oracle::solve(GridWorld::frozen_lake_8x8(0.0));
  const auto w = GridWorld::frozen_lake_8x8(0.0);
  int good = 0;
  std::string per_seed;
  for (const auto& inst : c.det) {
    const auto r = evaluate(inst.population, w, oracle.q_star, oracle.pi_star);
    if (r.mae <= 0.03 && r.policy_accuracy >= 0.95) ++good;
    per_seed += fmt::format(" [mae {:.4f} acc {:.3f}]", r.mae, r.policy_accuracy);
  }
  return {good >= 4, fmt::format("{}/5 seeds in envelope{} time {:.0f}s", good, per_seed, seconds_since(t0))};
}

Verdict stochastic_report_shapes() {
  const auto t0 = Clock::now();
  auto& c = corpus();
  const fs::path dir = kOut / "slip";
  c.slip = train_five(EnvVariant::Slip01, dir);
  const auto w = GridWorld::frozen_lake_8x8(0.1);

  {
    auto heat = open_output(dir / "heatmap.csv");
    auto acts = open_output(dir / "actions.csv");
    write_state_reports(c.slip, w, heat, acts);
  }
  {
    auto out = open_output(dir / "stg.csv");
    write_stg_csv(out, run_stg_groups(c.slip, w, default_stg_groups(), kSeed));
  }
  {
    auto out = open_output(dir / "sweep.csv");
    write_sweep_csv(out, run_compaction_sweep(c.slip, w, compaction::mass_names(), compaction::default_rho_grid()),
                    c.slip.size());
  }

  // file, schema kind, expected data rows
  const std::vector<std::tuple<std::string, std::string, std::size_t>> expected = {
      {"trace.csv", "trace", 5 * 80},   {"aggregate.csv", "aggregate", 80}, {"heatmap.csv", "heatmap", 53},
      {"actions.csv", "actions", 53},   {"stg.csv", "stg", 15},             {"sweep.csv", "sweep", 300},
  };
  std::string problems;
  for (const auto& [file, kind, rows] : expected) {
    const auto lines = lines_of(dir / file);
    if (lines.size() < 2 || parse_schema_line(lines[0]) != CsvSchema{kind, 1}) {
      problems += " " + file + ":schema";
      continue;
    }
    if (lines.size() - 2 != rows) problems += fmt::format(" {}:{} rows", file, lines.size() - 2);
  }
  for (std::size_t k = 0; k < 5; ++k)
    if (!fs::exists(dir / population_file_name(k))) problems += " missing " + population_file_name(k);
  return {problems.empty(), fmt::format("{} time {:.0f}s", problems.empty() ? "all shapes as expected" : problems,
                                        seconds_since(t0))};
}

// The deterministic envelope plus report shapes from the slippery 5-seed run.
Verdict training() {
  const auto det = deterministic_training();
  const auto slip = stochastic_report_shapes();
  return {det.pass && slip.pass, "det: " + det.detail + "; slip01 reports: " + slip.detail};
}

// 90 shorter runs across both worlds, replacing any population with a gap.
void train_extra_corpus() {
  auto& c = corpus();
  if (!c.extra.empty()) return;
  xcsf::TrainOptions opt;
  opt.cadence = 0;
  std::uint64_t stream = 0;
  while (c.extra.size() < 90) {
    const double slip = c.extra.size() % 2 == 0 ? 0.0 : 0.1;
    const auto w = GridWorld::frozen_lake_8x8(slip);
    const std::int64_t budget = 10'000 + 10'000 * static_cast<std::int64_t>(c.extra.size() % 5);
    auto r = xcsf::train(w, xcsf::Hyperparams{}, budget, derive_seed(kSeed, 500 + stream++), opt);
    if (!first_gap(system_predictions(r.population, w))) c.extra.emplace_back(w, std::move(r.population));
  }
}

std::vector<std::pair<GridWorld, xcsf::Population>> all_populations(std::size_t n) {
  train_extra_corpus();
  const auto& c = corpus();
  std::vector<std::pair<GridWorld, xcsf::Population>> out;
  for (const auto& i : c.det) out.emplace_back(GridWorld::frozen_lake_8x8(0.0), i.population);
  for (const auto& i : c.slip) out.emplace_back(GridWorld::frozen_lake_8x8(0.1), i.population);
  for (const auto& e : c.extra) out.push_back(e);
  out.resize(std::min(n, out.size()), {GridWorld::frozen_lake_8x8(0.0), {}});
  return out;
}

Verdict no_gap_property() {
  const auto pops = all_populations(50);
  std::size_t violations = 0, runs = 0, rejected = 0;
  for (const auto& [w, pop] : pops) {
    if (first_gap(system_predictions(pop, w))) {
      ++rejected;
      continue;
    }
    for (const auto& name : compaction::mass_names())
      for (double rho : {0.0, 0.25, 0.5, 0.9, 0.99}) {
        ++runs;
        const auto out = compaction::gnmc(pop, w, {compaction::mass_by_name(name), rho});
        if (first_gap(system_predictions(out, w))) ++violations;
      }
  }
  return {pops.size() == 50 && rejected == 0 && violations == 0,
          fmt::format("{} populations, {} compactions, {} violations", pops.size(), runs, violations)};
}

Verdict rho_zero_semantics() {
  const auto pops = all_populations(100);
  std::size_t bad = 0, removed = 0;
  for (const auto& [w, pop] : pops) {
    const auto q = value_iteration(w);
    const auto pi = greedy_advocacy(q, 1e-9);
    for (const auto& name : compaction::mass_names()) {
      const auto out = compaction::gnmc(pop, w, {compaction::mass_by_name(name), 0.0});
      if (evaluate(out, w, q, pi).mae - evaluate(pop, w, q, pi).mae != 0.0) ++bad;
      // expected survivors: rules matching at least one non-terminal state
      std::set<std::uint64_t> expected, got;
      for (const auto& c : pop.members)
        for (State s : w.nonterminal_states())
          if (s.x >= c.condition.mins[0] && s.x <= c.condition.mins[0] + c.condition.spans[0] &&
              s.y >= c.condition.mins[1] && s.y <= c.condition.mins[1] + c.condition.spans[1]) {
            expected.insert(c.id);
            break;
          }
      for (const auto& c : out.members) got.insert(c.id);
      if (got != expected) ++bad;
      removed += pop.macro_count() - out.macro_count();
    }
  }
  return {bad == 0, fmt::format("{} populations x 3 masses, {} mismatches, {} terminal-only rules removed",
                                pops.size(), bad, removed)};
}

Verdict pdrc_equivalence() {
  const auto pops = all_populations(100);
  std::size_t mismatches = 0;
  for (const auto& [w, pop] : pops) {
    const auto out = compaction::gnmc(pop, w, {compaction::mass_by_name("tan"), 0.99});
    std::set<std::uint64_t> got;
    for (const auto& c : out.members) got.insert(c.id);
    if (got != test_support::pdrc_keep_set(pop, w)) ++mismatches;
  }
  return {pops.size() == 100 && mismatches == 0,
          fmt::format("{} populations, {} keep-set mismatches", pops.size(), mismatches)};
}

Verdict compaction_retention() {
  const auto& det = corpus().det;
  const auto w = GridWorld::frozen_lake_8x8(0.0);
  const auto oracle = Oracle::solve(w);
  int good = 0;
  std::string per_seed;
  for (const auto& inst : det) {
    const auto before = evaluate(inst.population, w, oracle.q_star, oracle.pi_star);
    const auto after = evaluate(compact_instance(inst, w, {compaction::mass_by_name("fit"), 0.99}), w,
                                oracle.q_star, oracle.pi_star);
    const double d_mae = after.mae - before.mae;
    const double d_acc = after.policy_accuracy - before.policy_accuracy;
    const double reduction = 1.0 - static_cast<double>(after.macro_count) / static_cast<double>(before.macro_count);
    if (d_mae <= 0.005 && d_acc >= -0.02 && reduction >= 0.5) ++good;
    per_seed += fmt::format(" [dmae {:+.4f} dacc {:+.3f} macro -{:.0f}%]", d_mae, d_acc, 100 * reduction);
  }
  return {det.size() == 5 && good == 5, fmt::format("{}/5 seeds{}", good, per_seed)};
}

Verdict metric_oracles() {
  const auto w = GridWorld::frozen_lake_8x8(0.1);
  const auto zero = QTable::zeros(w);
  const auto ref = greedy_advocacy(value_iteration(w), 1e-9);
  Rng rng(kSeed);
  double worst_mae = 0.0, worst_acc = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto a = zero, b = zero;
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      for (std::size_t i = 0; i < kNumActions; ++i) {
        a.values[k][i] = rng.uniform();
        b.values[k][i] = rng.uniform();
        sum += std::abs(a.values[k][i] - b.values[k][i]);
      }
    worst_mae = std::max(worst_mae, std::abs(q_mae(a, b) - sum / 212.0));

    auto p = ref, h = ref;
    int hits = 0;
    for (std::size_t k = 0; k < p.vectors.size(); ++k) {
      p.vectors[k] = Advocacy(1 + rng.index(15));
      h.vectors[k] = Advocacy(rng.index(16));
      bool hit = false;
      for (std::size_t i = 0; i < 4; ++i) hit = hit || (p.vectors[k][i] && h.vectors[k][i]);
      hits += hit;
    }
    worst_acc = std::max(worst_acc, std::abs(policy_accuracy(p, h) - hits / 53.0));
  }
  Advocacy star, hat;
  star[1] = star[2] = true;
  hat[2] = true;
  const int example = correctness(star, hat);
  return {worst_mae <= 1e-12 && worst_acc <= 1e-12 && example == 1,
          fmt::format("1000 trials, max |dmae| {:.2e} max |dacc| {:.2e}, C(0110,0010)={}", worst_mae, worst_acc,
                      example)};
}

Verdict stg_baseline() {
  const auto t0 = Clock::now();
  const auto w = GridWorld::frozen_lake_8x8(0.0);
  const auto r = rollout::stg_test(w, rollout::greedy_policy(value_iteration(w), w));
  const double elapsed = seconds_since(t0);
  const bool ok = r.mean_stg == 14.0 && r.max_stg == 14u && r.successes == 100 && r.num_rollouts == 100 &&
                  elapsed < 1.0;
  return {ok, fmt::format("mean {} max {} successes {}/{} time {:.3f}s", r.mean_stg.value_or(-1),
                          r.max_stg.value_or(0), r.successes, r.num_rollouts, elapsed)};
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

Verdict reproducibility() {
  const fs::path slip_pops = kOut / "slip";
  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"solve", "--env slip01"},
      {"train", "--env slip01 --trials 2 --budget 20000 --cadence 5000 --seed 3"},
      {"compact", fmt::format("--env slip01 --in {} --mass fit --rho 0.9", slip_pops.string())},
      {"evaluate", fmt::format("--env slip01 --in {}", slip_pops.string())},
      {"rollout", fmt::format("--env slip01 --in {} --seed 3", slip_pops.string())},
      {"sweep", fmt::format("--env slip01 --in {} --rho-grid 0:0.9:0.3", slip_pops.string())},
      {"report", fmt::format("--env slip01 --in {}", slip_pops.string())},
  };
  std::string problems;
  for (const auto& [verb, args] : verbs) {
    std::array<std::map<std::string, std::string>, 2> runs;
    for (int r = 0; r < 2; ++r) {
      const fs::path dir = kOut / "repro" / fmt::format("{}-{}", verb, r);
      fs::remove_all(dir);
      const auto cmd = fmt::format("\"{}\" {} {} --out {} > /dev/null", LCSRL_CLI, verb, args, dir.string());
      if (std::system(cmd.c_str()) != 0) {
        problems += " " + verb + ":exit";
        break;
      }
      runs[r] = tree_contents(dir);
    }
    if (runs[0].empty() || runs[0] != runs[1]) problems += " " + verb + ":differs";
  }
  return {problems.empty(), problems.empty() ? "solve train compact evaluate rollout sweep report byte-identical"
                                             : "failed:" + problems};
}

}  // namespace

int main() {
  fs::create_directories(kOut);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"oracle-correctness", oracle_correctness},
      {"stochastic-dynamics", stochastic_dynamics},
      {"training", training},
      {"gnmc-no-gaps", no_gap_property},
      {"gnmc-rho-zero", rho_zero_semantics},
      {"pdrc-equivalence", pdrc_equivalence},
      {"compaction-retention", compaction_retention},
      {"metric-oracles", metric_oracles},
      {"stg-optimal-baseline", stg_baseline},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
