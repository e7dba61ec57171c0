#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prefx/env.hpp"
#include "prefx/objectives.hpp"

namespace prefx {

// Machine-readable outcome of one numerical lemma check.
struct CheckReport {
  std::string name;
  bool pass = true;
  bool deterministic = true;  // statistical checks report a frequency instead
  std::uint64_t cases_checked = 0;
  std::uint64_t violations = 0;
  // Largest observed LHS / (r_max * RHS-core); shows the slack in the
  // lemma constants (20 and 3).
  double max_ratio = 0.0;
  std::vector<double> witness;  // first violating point, if any
  std::map<std::string, double> stats;
};

// Grid scan of the preference-to-reward reduction: for triples (a, b, c)
// in [0, r_max]^3 with a = max and b - c <= 1 (inclusive),
//   (a - b) <= 20 r_max (sigma(a - c) - sigma(b - c)).
// grid_step <= 0 selects the default resolution (0.01 up to r_max = 4,
// 0.05 above).
CheckReport check_p2r_reduction(double r_max, double grid_step = 0.0);

// Grid scan of the sigmoid link bound: for (a, b) in [-r_max/2, r_max/2]^2,
//   sigma'(a) |a - b| <= 3 r_max |sigma(a) - sigma(b)|.
CheckReport check_sigmoid_link(double r_max, double grid_step = 0.0);

// |G(r, pi(r)) - H(r, pi(r))| <= (beta/2) E_rho KL(pi*_r || pi_ref) over
// random class members and random full-support samplers.
CheckReport check_gh_gap(const Environment& env, const RewardClass& cls, double beta,
                         int trials, std::uint64_t seed);

// Round-trip of the implicit-reward identity to 1e-9 over random rewards
// and references.
CheckReport check_dpo_identity(const Environment& env, double beta, int trials,
                               std::uint64_t seed);

// Empirical concentration of the MLE loss gap: simulates the online
// labeling protocol and counts how often any class member violates
//   l(r*) - l(r) <= -(1/2) sum_s E[(P* - P_r)^2] + 2 log(|R|/delta).
// Statistical: passes if the frequency stays within delta plus two
// binomial standard errors at every dataset size.
CheckReport check_mle_concentration(const Environment& env, const RewardClass& cls,
                                    const std::vector<std::size_t>& n_grid, int trials,
                                    double delta, std::uint64_t seed);

struct VerifySettings {
  std::vector<double> r_max_list = {1.0, 4.0, 10.0};
  double grid_step = 0.0;  // 0 = default per r_max
  std::vector<double> beta_list = {0.01, 0.05, 0.2};
  int gh_trials = 200;
  int dpo_trials = 100;
  std::vector<std::size_t> mle_n_grid = {250, 1000, 4000};
  int mle_trials = 200;
  double delta = 0.05;
  std::uint64_t seed = 7;
};

// Full check suite over a shared environment/class instance.
std::vector<CheckReport> run_verify_suite(const Environment& env, const RewardClass& cls,
                                          const VerifySettings& settings);

}  // namespace prefx
