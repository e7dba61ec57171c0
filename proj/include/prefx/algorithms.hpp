#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "prefx/env.hpp"
#include "prefx/objectives.hpp"
#include "prefx/policy.hpp"
#include "prefx/rng.hpp"
#include "prefx/solvers.hpp"

namespace prefx {

// Second-response source during online data collection.
enum class SamplerMode {
  kFixedRef,   // (pi_t, pi_ref): theoretical XPO / plateauing DPO variant
  kSelfPlay,   // (pi_t, pi_t): practical variant
};

enum class SepopoMode {
  kTheory,     // Algorithms 1-2 verbatim: fresh dataset per interval
  kPractical,  // batched last-iterate-reference variant with the pruned bonus
};

SamplerMode parse_sampler_mode(const std::string& s);
std::string to_string(SamplerMode m);

struct TraceRow {
  int iter = 0;       // 1-based, global across intervals
  int interval = 1;   // SE-POPO interval index k
  std::size_t dataset_size = 0;
  double loss_chosen = 0.0;
  double loss_min = 0.0;
  double bonus_term = 0.0;  // alpha-weighted bonus contribution to the objective
  bool indicator = true;
  double subopt_iterate = 0.0;   // SubOpt(pi_t)
  double subopt_mixture = 0.0;   // SubOpt(Uniform(pi_1..pi_t)), within interval
  double pref_regret = 0.0;      // single-round regret term vs this round's sampler
  double cum_pref_regret = 0.0;  // within interval
  std::size_t labels_used = 0;   // global oracle-call counter after this round
  std::uint64_t rng_counter = 0; // stream position before this round's draws
  double wall_ms = 0.0;          // in-memory only; never serialized
  std::vector<double> theta;     // chosen reward parameters after this round
};

struct IntervalSummary {
  int k = 1;
  double sampler_expected_reward = 0.0;  // E_{rho, pi_sam^k}[r*]
  double mixture_subopt = 0.0;
  double last_iterate_subopt = 0.0;
  std::size_t labels = 0;
};

struct RunTrace {
  bool full = true;  // per-iteration metric columns populated
  std::vector<TraceRow> rows;
  std::vector<IntervalSummary> intervals;
  // Post-solve policies captured at RunOptions::checkpoint_iters.
  std::vector<TabularPolicy> checkpoint_policies;
  std::size_t labels_used = 0;
  double final_subopt_mixture = 0.0;
  double final_subopt_last_iterate = 0.0;
  double c_kl = 0.0;        // E_rho KL(pi^* || pi_ref)
  double c_kl_prime = 0.0;  // max over the class of E_rho KL(pi^*_r || pi_ref)
  bool analyzed_regime = true;
  double wall_ms = 0.0;
};

struct RunOptions {
  // Per-iteration exact metrics are the bulk of the loop cost; sweeps turn
  // them off and keep only counters and final summaries.
  bool full_trace = true;
  // SE-POPO: carry the dataset across intervals. Unanalyzed variant.
  bool carry_data = false;
  // POPO exploration bonus: kPreference (G) or kPreferenceLight (H).
  BonusKind popo_bonus = BonusKind::kPreference;
  // Labels per outer iteration in the practical SE-POPO mode.
  std::size_t practical_batch = 64;
  // Global iteration indices at which to snapshot the post-solve policy.
  std::vector<int> checkpoint_iters;
};

// POPO (one interval): T rounds of sample / label / re-solve against a
// fixed sampler; returns Uniform(pi_1..pi_T) and the trace.
std::pair<TabularPolicy, RunTrace> run_popo(const Environment& env, const RewardClass& cls,
                                            const TabularPolicy& pi_ref,
                                            const TabularPolicy& pi_sam,
                                            const AlgorithmParams& params,
                                            const SolverConfig& scfg, Rng& rng,
                                            const RunOptions& opts = {});

// SE-POPO: K POPO intervals; each interval's output becomes the next
// sampler, the last interval's output is returned.
std::pair<TabularPolicy, RunTrace> run_sepopo(const Environment& env, const RewardClass& cls,
                                              const TabularPolicy& pi_ref,
                                              const AlgorithmParams& params,
                                              const SolverConfig& scfg, Rng& rng,
                                              SepopoMode mode = SepopoMode::kTheory,
                                              const RunOptions& opts = {});

// Iterative DPO: passive exploration (alpha forced to 0); the second
// response is drawn per sampler_mode.
std::pair<TabularPolicy, RunTrace> run_dpo_iter(const Environment& env, const RewardClass& cls,
                                                const TabularPolicy& pi_ref,
                                                const AlgorithmParams& params,
                                                const SolverConfig& scfg, Rng& rng,
                                                SamplerMode sampler_mode,
                                                const RunOptions& opts = {});

// XPO: reward-based optimism bonus J, no truncation indicator.
std::pair<TabularPolicy, RunTrace> run_xpo(const Environment& env, const RewardClass& cls,
                                           const TabularPolicy& pi_ref,
                                           const AlgorithmParams& params,
                                           const SolverConfig& scfg, Rng& rng,
                                           SamplerMode sampler_mode,
                                           const RunOptions& opts = {});

}  // namespace prefx
