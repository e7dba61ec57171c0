#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prefx/env.hpp"

namespace prefx {

// Dense reward values over prompts x responses, row-major. Used both for
// the ground truth (with offsets) and for candidate reward functions.
struct RewardTable {
  std::size_t num_prompts = 0;
  std::size_t num_responses = 0;
  std::vector<double> r;

  double at(std::size_t x, std::size_t y) const { return r[x * num_responses + y]; }
  std::span<const double> row(std::size_t x) const {
    return {r.data() + x * num_responses, num_responses};
  }
};

// r_theta(x, y) = <phi(x, y), theta>, no offsets.
RewardTable make_reward_table(const Environment& env, std::span<const double> theta);

// r*(x, y) including the per-prompt range offsets.
RewardTable true_reward_table(const Environment& env);

// Explicit conditional distribution pi(y | x) over the finite response set.
struct TabularPolicy {
  std::size_t num_prompts = 0;
  std::size_t num_responses = 0;
  std::vector<double> p;

  static TabularPolicy uniform(std::size_t nx, std::size_t ny);

  double at(std::size_t x, std::size_t y) const { return p[x * num_responses + y]; }
  double& at(std::size_t x, std::size_t y) { return p[x * num_responses + y]; }
  std::span<const double> row(std::size_t x) const {
    return {p.data() + x * num_responses, num_responses};
  }

  bool full_support() const;
  // Rows nonnegative, each summing to 1 within tol.
  void validate(double tol = 1e-10) const;
};

// Closed-form KL-regularized optimum: pi(y|x) ~ pi_ref(y|x) exp(r(x,y)/beta),
// computed with a per-prompt max shift. Zero entries of pi_ref stay zero;
// a reference row with no support at all is an error.
TabularPolicy kl_regularized_argmax(const RewardTable& r, const TabularPolicy& pi_ref,
                                    double beta);

// beta*log(pi/pi_ref)(y) - beta*log(pi/pi_ref)(y'); errors on zero
// probability at a queried entry.
double implicit_reward_gap(const TabularPolicy& pi, const TabularPolicy& pi_ref, double beta,
                           std::size_t x, std::size_t y, std::size_t yp);

// Probability 1 on the per-prompt argmax; ties within 1e-12 split uniformly.
TabularPolicy greedy_policy(const RewardTable& r);

// E_{x~rho} KL(pi(.|x) || pi_ref(.|x)) with 0 log 0 = 0; errors if pi puts
// mass where pi_ref has none.
double expected_kl(const TabularPolicy& pi, const TabularPolicy& pi_ref,
                   const PromptDistribution& rho);

// Entrywise average; a single policy is returned unchanged.
TabularPolicy uniform_mixture(std::span<const TabularPolicy> policies);

// E_{x~rho, y~pi}[r(x, y)].
double expected_reward(const TabularPolicy& pi, const RewardTable& r,
                       const PromptDistribution& rho);

// Softmin of the true rewards: pi(y|x) ~ exp(-r*(x,y)/tau). Full support
// with its mass on the worst responses; the desk-scale stand-in for a weak
// reference model whose probability of a top response vanishes as the
// reward range grows.
TabularPolicy skewed_reference(const Environment& env, double tau);

// One response index from pi(.|x).
std::size_t sample_response(const TabularPolicy& pi, std::size_t x, Rng& rng);

}  // namespace prefx
