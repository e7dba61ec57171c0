#include "prefx/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "prefx/oracle.hpp"

namespace prefx {

double subopt(const TabularPolicy& pi, const Environment& env) {
  const RewardTable truth = true_reward_table(env);
  const TabularPolicy best = greedy_policy(truth);
  const double gap = expected_reward(best, truth, env.rho) - expected_reward(pi, truth, env.rho);
  // Exact math guarantees >= 0; only FP dust can dip below.
  if (gap < -1e-9) throw std::runtime_error("subopt: negative beyond tolerance");
  return gap < 0.0 ? 0.0 : gap;
}

double pref_regret_term(const TabularPolicy& pi, const TabularPolicy& pi_sam,
                        const Environment& env) {
  const RewardTable truth = true_reward_table(env);
  const TabularPolicy best = greedy_policy(truth);
  const std::size_t ny = env.num_responses();
  double total = 0.0;
  for (std::size_t x = 0; x < env.num_prompts(); ++x) {
    double term = 0.0;
    for (std::size_t yp = 0; yp < ny; ++yp) {
      const double q = pi_sam.at(x, yp);
      if (q == 0.0) continue;
      double win_best = 0.0, win_pi = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        const double p_win = sigmoid(truth.at(x, y) - truth.at(x, yp));
        win_best += best.at(x, y) * p_win;
        win_pi += pi.at(x, y) * p_win;
      }
      term += q * (win_best - win_pi);
    }
    total += env.rho.weights[x] * term;
  }
  return total;
}

double winrate(const TabularPolicy& pi_a, const TabularPolicy& pi_b, const Environment& env) {
  const RewardTable truth = true_reward_table(env);
  const std::size_t ny = env.num_responses();
  double total = 0.0;
  for (std::size_t x = 0; x < env.num_prompts(); ++x) {
    double wx = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      const double pa = pi_a.at(x, y);
      if (pa == 0.0) continue;
      double inner = 0.0;
      for (std::size_t yp = 0; yp < ny; ++yp) {
        const double pb = pi_b.at(x, yp);
        if (pb == 0.0) continue;
        inner += pb * sigmoid(truth.at(x, y) - truth.at(x, yp));
      }
      wx += pa * inner;
    }
    total += env.rho.weights[x] * wx;
  }
  return total;
}

std::vector<double> reward_histogram(const TabularPolicy& pi, const Environment& env,
                                     std::size_t bins) {
  if (bins < 1) throw std::invalid_argument("reward_histogram: bins must be >= 1");
  const RewardTable truth = true_reward_table(env);
  std::vector<double> hist(bins, 0.0);
  const double scale = static_cast<double>(bins) / env.spec.r_max;
  for (std::size_t x = 0; x < env.num_prompts(); ++x) {
    for (std::size_t y = 0; y < env.num_responses(); ++y) {
      const double mass = env.rho.weights[x] * pi.at(x, y);
      if (mass == 0.0) continue;
      auto b = static_cast<std::size_t>(std::max(0.0, truth.at(x, y)) * scale);
      if (b >= bins) b = bins - 1;
      hist[b] += mass;
    }
  }
  return hist;
}

double tv_distance(std::span<const double> h1, std::span<const double> h2) {
  if (h1.size() != h2.size()) throw std::invalid_argument("tv_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < h1.size(); ++i) s += std::abs(h1[i] - h2[i]);
  return 0.5 * s;
}

}  // namespace prefx
