#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "glearn/domains.hpp"
#include "glearn/exploration.hpp"
#include "glearn/learners.hpp"
#include "glearn/metrics.hpp"

namespace glearn {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlgorithmConfig {
  std::string label;  // [A-Za-z0-9_-]+, used in file names and seeds
  LearnerOptions options;
};

struct DomainConfig {
  enum class Kind { Gridworld, Cliff };
  Kind kind = Kind::Gridworld;
  std::string map_path;  // resolved relative to the config file
  CostVariant cost;
  double gamma = 0.95;
};

struct ExperimentConfig {
  DomainConfig domain;
  std::vector<AlgorithmConfig> algorithms;
  std::uint64_t iterations = 250000;
  int runs = 100;
  std::uint64_t base_seed = 1;
  std::uint64_t eval_interval = 1000;
  ExplorationRegime exploration;
  std::string out_dir = "out";
  int workers = 0;                     // 0: one per hardware thread
  bool per_run_csv = false;
  std::uint64_t sweep_iterations = 0;  // 0: iterations / 5
  int sweep_runs = 5;
  bool sweep_realized_cost = false;    // score sweeps by realized cost
};

// INI-style config: [domain] and [run] sections plus one
// [algorithm.<label>] section per learner. Unknown sections or keys are
// errors, as are duplicate keys and malformed values; messages carry the
// line number.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin = "");
ExperimentConfig parse_config_file(const std::string& path);

// Structural checks over the whole config, including parsing the map and
// validating the built MDP. Throws ConfigError; run_experiment calls this
// before starting any run.
void validate_config(const ExperimentConfig& cfg);

// The benchmark MDP for one run index. Only the generated-means gridworld
// actually varies with the run; the builder seed is
// derive_seed(base_seed, run, "domain").
BuiltDomain build_domain(const DomainConfig& domain, std::uint64_t base_seed,
                         std::uint64_t run);

struct RunResult {
  MetricSeries series;
  TransitionHistogram histogram;
  double cumulative_cost = 0.0;
  // Mean over non-terminal states of the exact cost-to-go of the final
  // greedy policy on this run's MDP.
  double final_policy_cost = 0.0;
};

struct ExperimentResult {
  std::vector<std::string> labels;           // config order
  int n_runs = 0;
  std::vector<RunResult> runs;               // [algo * n_runs + run]
  std::vector<MetricSeries> aggregates;      // run averages, one per algo
  std::vector<TransitionHistogram> histograms;  // run sums, one per algo
  BuiltDomain domain;                        // run-0 domain

  const RunResult& run(int algo, int run_idx) const {
    return runs[static_cast<std::size_t>(algo) * n_runs + run_idx];
  }
};

// Runs every (algorithm, run) pair and averages the metric series per
// algorithm. Tasks are distributed over a worker pool into preallocated
// slots, so results are identical for any worker count. Learner streams are
// seeded derive_seed(base_seed, run, label): one stream per pair drives
// exploration, transitions, and the learner's own draws.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes aggregate.csv (and runs.csv when per_run_csv is set) plus, for
// cliff domains, visits_<label>.csv / transitions_<label>.csv per
// algorithm. Numbers are printed with %.17g so a rerun is byte-identical.
// Throws on any write failure, naming the file.
void emit_csv(const ExperimentResult& res, const ExperimentConfig& cfg,
              const std::string& out_dir);

struct SweepPoint {
  double k = 0.0;
  double score = 0.0;  // mean cost of the final policy, lower is better
};
struct SweepResult {
  double chosen_k = 0.0;
  std::vector<SweepPoint> points;  // in the order the candidates were given
};

// Preliminary-run selection of the linear schedule slope: for each
// candidate k, sweep_runs short runs of the first linear-schedule soft
// learner in the config; the candidate with the lowest mean score wins,
// ties going to the smaller k.
SweepResult k_sweep(const ExperimentConfig& cfg, std::span<const double> ks);

// The sweep engine on explicit MDPs, for callers that are not driving one
// of the benchmark domains.
struct SweepTask {
  std::vector<const TabularMdp*> mdps;  // one per preliminary run
  std::vector<int> start_states;        // one per run (epsilon-greedy resets)
  ExplorationRegime regime;
  LearnerOptions options;               // beta schedule replaced per candidate
  std::uint64_t iterations = 0;
  std::uint64_t base_seed = 0;
  std::string label;
  bool realized_cost = false;
  std::vector<std::uint8_t> include;    // state mask for exact scoring
};
SweepResult k_sweep_task(const SweepTask& task, std::span<const double> ks);

// Worker-count override from GLEARN_WORKERS, else `fallback`.
int workers_from_env_or(int fallback);

}  // namespace glearn
