#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prefx/env.hpp"
#include "prefx/oracle.hpp"
#include "prefx/policy.hpp"
#include "prefx/rng.hpp"

namespace prefx {

// Linear reward candidate: r(x, y) = <phi(x, y), theta>.
struct RewardFunction {
  std::vector<double> theta;
};

// Finite reward class. The canonical construction fills the ||theta|| <=
// r_max ball with a deterministic low-discrepancy (Halton) net and appends
// theta* as the last member, so realizability is exact.
struct RewardClass {
  std::vector<RewardFunction> members;
  bool contains_truth = false;
  std::size_t truth_index = 0;  // valid only when contains_truth

  std::size_t size() const { return members.size(); }
};

RewardClass make_reward_class(const Environment& env, std::size_t size);

// Ordered, append-only sequence of labeled comparisons.
struct PreferenceDataset {
  std::vector<PreferenceSample> samples;

  void append(const PreferenceSample& s) { samples.push_back(s); }
  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Negative log-likelihood of the Bradley-Terry labels:
//   -sum_n log sigma(r(x_n, y_n^w) - r(x_n, y_n^l));  0 on empty data.
double mle_loss(const RewardTable& r, const PreferenceDataset& data);

// Contribution of a single sample to mle_loss.
double mle_loss_term(const RewardTable& r, const PreferenceSample& s);

// Same loss with the reward gap replaced by the implicit policy log-ratio
// gap; equals mle_loss(r, .) when pi = kl_regularized_argmax(r, pi_ref, beta).
double dpo_loss(const TabularPolicy& pi, const TabularPolicy& pi_ref, double beta,
                const PreferenceDataset& data);

// KL-regularized value: E_{rho, pi}[r] - beta * E_rho KL(pi || pi_ref).
double value_j(const RewardTable& r, const TabularPolicy& pi, const TabularPolicy& pi_ref,
               double beta, const PromptDistribution& rho);

// Expected preference rate of pi over pi_sam under reward r, summed exactly
// over the finite space:
//   sum_x rho(x) sum_{y,y'} pi(y|x) pi_sam(y'|x) sigma(r(x,y) - r(x,y')).
double bonus_g(const RewardTable& r, const TabularPolicy& pi, const TabularPolicy& pi_sam,
               const PromptDistribution& rho);

// Monte Carlo estimate of bonus_g for response sets too large for the
// exact triple sum.
double bonus_g_mc(const RewardTable& r, const TabularPolicy& pi, const TabularPolicy& pi_sam,
                  const PromptDistribution& rho, std::size_t num_samples, Rng& rng);

// On-policy form of the bonus written through the policy log-ratios.
// Exposed for the ablation against the pruned bonus, not as the default.
double bonus_g_policy(const TabularPolicy& pi, const TabularPolicy& pi_ref,
                      const TabularPolicy& pi_sam, double beta, const PromptDistribution& rho);

// Lightweight bonus with the on-policy term pruned:
//   sum_x rho(x) sum_{y'} pi_sam(y'|x) sigma(-beta log(pi(y'|x)/pi_ref(y'|x))).
double bonus_h(const TabularPolicy& pi, const TabularPolicy& pi_ref,
               const TabularPolicy& pi_sam, double beta, const PromptDistribution& rho);

// 1 iff loss(r) is within gamma (inclusive) of the class minimum.
bool indicator_i(double loss_r, double min_class_loss, double gamma);

// Convenience form that enumerates the finite class for the inner min.
bool indicator_i(const RewardTable& r, const RewardClass& cls, const Environment& env,
                 const PreferenceDataset& data, double gamma);

}  // namespace prefx
