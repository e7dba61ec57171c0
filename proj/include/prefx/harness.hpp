#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prefx/algorithms.hpp"
#include "prefx/config.hpp"
#include "prefx/env.hpp"

namespace prefx {

// In-memory artifact set; a single writer flushes it in list order so
// reruns with identical inputs are byte-identical on disk.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;  // relpath, bytes

  void add(std::string relpath, std::string bytes) {
    files.emplace_back(std::move(relpath), std::move(bytes));
  }
};

struct ExperimentResult {
  Artifacts artifacts;
  bool verify_failed = false;
};

// Shared config plumbing, also used by tests.
Environment env_from_config(const KeyValueConfig& cfg);
RewardClass class_from_config(const KeyValueConfig& cfg, const Environment& env);
SolverConfig solver_from_config(const KeyValueConfig& cfg);
AlgorithmConfig algorithm_from_config(const KeyValueConfig& cfg);

// One algorithm run addressed by name: popo | popo-light | sepopo |
// sepopo-practical | dpo-ref | dpo-self | xpo-ref | xpo-self.
std::pair<TabularPolicy, RunTrace> run_algorithm(const std::string& name, const Environment& env,
                                                 const RewardClass& cls,
                                                 const TabularPolicy& pi_ref,
                                                 const AlgorithmParams& params,
                                                 const SolverConfig& scfg, Rng& rng,
                                                 const RunOptions& opts);

// Experiments: single | replicate | sweep_rmax | ablation_sampler | verify.
// Pure function of the config; workers only affects wall-clock.
ExperimentResult run_experiment(const KeyValueConfig& cfg, const std::string& experiment,
                                int workers);

// Throws ConfigError if out_dir exists non-empty and overwrite is false.
void write_artifacts(const std::string& out_dir, const Artifacts& artifacts, bool overwrite);

struct CliOptions {
  std::string config_path;
  std::string experiment;  // falls back to the config "experiment" key
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> seeds;
  std::vector<std::string> overrides;
  int workers = 0;  // 0 = hardware concurrency
  bool overwrite = false;
};

// Exit codes: 0 ok, 1 run failure, 2 config error, 3 verification failure.
int run_cli(const CliOptions& opts);

}  // namespace prefx
