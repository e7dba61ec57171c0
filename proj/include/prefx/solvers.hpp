#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "prefx/env.hpp"
#include "prefx/objectives.hpp"
#include "prefx/policy.hpp"

namespace prefx {

enum class SolverBackend { kEnumerate, kGradient };

SolverBackend parse_solver_backend(const std::string& s);
std::string to_string(SolverBackend b);

struct SolverConfig {
  SolverBackend backend = SolverBackend::kEnumerate;
  int steps = 500;
  // Online loops warm-start each gradient re-solve from the previous
  // iterate and run this many steps instead of a cold full solve.
  int warm_steps = 40;
  // Initial step; each solve scales it by 1/sqrt(1 + |D|) and halves on
  // non-improving proposals.
  double step_size = 0.1;
  double tolerance = 1e-6;
  // Gradient iterates are projected onto this ball; 0 means "use r_max".
  double projection_radius = 0.0;

  void validate() const;
  double radius(const Environment& env) const {
    return projection_radius > 0.0 ? projection_radius : env.spec.r_max;
  }
};

// Resolved per-run hyperparameters.
struct AlgorithmParams {
  double alpha = 0.0;
  double gamma = 0.0;
  double beta = 0.1;
  int T = 512;
  int K = 1;
  double delta = 0.05;

  void validate() const;
};

// User-facing knobs; unset fields resolve to the analysis defaults:
//   alpha = sqrt(d log(T/d) / (r_max T log(|R|/delta)))
//   gamma = 2 log(|R|/delta)
//   beta  = min(0.1, 1/sqrt(T))
//   K     = ceil(r_max)
struct AlgorithmConfig {
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<double> beta;
  int T = 512;
  std::optional<int> K;
  double delta = 0.05;

  AlgorithmParams resolve(const Environment& env, std::size_t class_size) const;
};

struct SolveResult {
  // Class index for the enumerate backend; npos for gradient solutions.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t index = npos;
  RewardFunction reward;
  TabularPolicy policy;  // kl_regularized_argmax of the solution (empty for pure MLE)
  double objective = 0.0;
  double loss = 0.0;
  double min_loss = 0.0;
  double bonus = 0.0;  // raw G / H / J value; 0 for pure MLE
  bool indicator = true;
  // Gradient solutions search the theta ball rather than the finite class,
  // which the theory does not cover.
  bool analyzed_regime = true;
};

// Which exploration bonus an objective carries.
enum class BonusKind {
  kNone,             // plain MLE / DPO
  kPreference,       // G, with the truncation indicator
  kPreferenceLight,  // H, with the truncation indicator
  kValue,            // J, no indicator
};

// argmin of the MLE loss. Enumerate: exact class argmin, ties to the lowest
// index. Gradient: projected descent over the theta ball.
SolveResult solve_mle(const RewardClass& cls, const PreferenceDataset& data,
                      const Environment& env, const SolverConfig& scfg);

// argmax of -loss + alpha * G(r, pi(r)) * I(r, D) with pi(r) the closed-form
// KL-regularized optimum.
SolveResult solve_popo(const RewardClass& cls, const PreferenceDataset& data,
                       const Environment& env, const TabularPolicy& pi_ref,
                       const TabularPolicy& pi_sam, const SolverConfig& scfg,
                       const AlgorithmParams& params);

// Same with the lightweight bonus H in place of G.
SolveResult solve_popo_light(const RewardClass& cls, const PreferenceDataset& data,
                             const Environment& env, const TabularPolicy& pi_ref,
                             const TabularPolicy& pi_sam, const SolverConfig& scfg,
                             const AlgorithmParams& params);

// argmax of -loss + alpha * J(r, pi(r)); no truncation indicator.
SolveResult solve_xpo(const RewardClass& cls, const PreferenceDataset& data,
                      const Environment& env, const TabularPolicy& pi_ref,
                      const SolverConfig& scfg, const AlgorithmParams& params);

// ---- incremental enumerate machinery shared with the online loops ----

// Everything about a class member that is fixed for a whole online run
// (the dataset never enters): reward tables, closed-form policies, and the
// dataset-independent bonus values.
struct ClassEval {
  BonusKind kind = BonusKind::kNone;
  std::vector<RewardTable> tables;
  std::vector<TabularPolicy> policies;
  std::vector<double> bonuses;
};

ClassEval precompute_class_eval(const RewardClass& cls, const Environment& env,
                                const TabularPolicy& pi_ref, const TabularPolicy& pi_sam,
                                double beta, BonusKind kind);

struct EnumSelection {
  std::size_t index = 0;
  double objective = 0.0;
  double loss = 0.0;
  double min_loss = 0.0;
  double bonus = 0.0;
  bool indicator = true;
};

// Index-ordered argmax of -loss + alpha * bonus (* indicator). This is the
// single selection rule used by both the stateless solvers and the online
// loops, so the two paths are bit-identical.
EnumSelection select_enumerate(std::span<const double> losses, std::span<const double> bonuses,
                               double alpha, double gamma, bool use_indicator);

// Carry-over state for gradient re-solves inside an online loop: both the
// MLE anchor and the objective iterate warm-start from the previous round.
struct GradientLoopState {
  bool initialized = false;
  std::vector<double> theta_mle;
  std::vector<double> theta;
};

// One warm-started gradient re-solve; cold full-length solve on the first
// call. pi_sam is ignored for kNone / kValue objectives.
SolveResult solve_gradient_step(BonusKind kind, const PreferenceDataset& data,
                                const Environment& env, const TabularPolicy& pi_ref,
                                const TabularPolicy& pi_sam, const SolverConfig& scfg,
                                const AlgorithmParams& params, GradientLoopState& state);

}  // namespace prefx
