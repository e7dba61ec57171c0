#include "prefx/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace prefx {

RewardTable make_reward_table(const Environment& env, std::span<const double> theta) {
  if (theta.size() != env.dim()) throw std::invalid_argument("make_reward_table: theta dim mismatch");
  RewardTable t;
  t.num_prompts = env.num_prompts();
  t.num_responses = env.num_responses();
  t.r.resize(t.num_prompts * t.num_responses);
  for (std::size_t x = 0; x < t.num_prompts; ++x) {
    for (std::size_t y = 0; y < t.num_responses; ++y) {
      auto f = env.features.at(x, y);
      double s = 0.0;
      for (std::size_t j = 0; j < theta.size(); ++j) s += f[j] * theta[j];
      t.r[x * t.num_responses + y] = s;
    }
  }
  return t;
}

RewardTable true_reward_table(const Environment& env) {
  RewardTable t = make_reward_table(env, env.truth.theta_star);
  for (std::size_t x = 0; x < t.num_prompts; ++x)
    for (std::size_t y = 0; y < t.num_responses; ++y)
      t.r[x * t.num_responses + y] += env.truth.offsets[x];
  return t;
}

TabularPolicy TabularPolicy::uniform(std::size_t nx, std::size_t ny) {
  TabularPolicy pi;
  pi.num_prompts = nx;
  pi.num_responses = ny;
  pi.p.assign(nx * ny, 1.0 / static_cast<double>(ny));
  return pi;
}

bool TabularPolicy::full_support() const {
  return std::all_of(p.begin(), p.end(), [](double v) { return v > 0.0; });
}

void TabularPolicy::validate(double tol) const {
  if (p.size() != num_prompts * num_responses)
    throw std::runtime_error("TabularPolicy: shape mismatch");
  for (std::size_t x = 0; x < num_prompts; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < num_responses; ++y) {
      const double v = at(x, y);
      if (!(v >= 0.0)) throw std::runtime_error("TabularPolicy: negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) throw std::runtime_error("TabularPolicy: row does not sum to 1");
  }
}

TabularPolicy kl_regularized_argmax(const RewardTable& r, const TabularPolicy& pi_ref,
                                    double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("kl_regularized_argmax: beta must be > 0");
  if (r.num_prompts != pi_ref.num_prompts || r.num_responses != pi_ref.num_responses)
    throw std::invalid_argument("kl_regularized_argmax: shape mismatch");

  const std::size_t nx = r.num_prompts;
  const std::size_t ny = r.num_responses;
  TabularPolicy pi;
  pi.num_prompts = nx;
  pi.num_responses = ny;
  pi.p.assign(nx * ny, 0.0);

  std::vector<double> w(ny);
  for (std::size_t x = 0; x < nx; ++x) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < ny; ++y) {
      const double rv = r.at(x, y);
      if (!std::isfinite(rv)) throw std::invalid_argument("kl_regularized_argmax: non-finite reward");
      const double ref = pi_ref.at(x, y);
      w[y] = ref > 0.0 ? std::log(ref) + rv / beta : -std::numeric_limits<double>::infinity();
      m = std::max(m, w[y]);
    }
    if (!std::isfinite(m))
      throw std::invalid_argument("kl_regularized_argmax: reference row has no support");
    double z = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      const double e = std::isfinite(w[y]) ? std::exp(w[y] - m) : 0.0;
      pi.at(x, y) = e;
      z += e;
    }
    for (std::size_t y = 0; y < ny; ++y) pi.at(x, y) /= z;
  }
  return pi;
}

double implicit_reward_gap(const TabularPolicy& pi, const TabularPolicy& pi_ref, double beta,
                           std::size_t x, std::size_t y, std::size_t yp) {
  const double a = pi.at(x, y), ar = pi_ref.at(x, y);
  const double b = pi.at(x, yp), br = pi_ref.at(x, yp);
  if (a <= 0.0 || ar <= 0.0 || b <= 0.0 || br <= 0.0)
    throw std::invalid_argument("implicit_reward_gap: zero probability at queried entry");
  return beta * std::log(a / ar) - beta * std::log(b / br);
}

TabularPolicy greedy_policy(const RewardTable& r) {
  constexpr double kTieTol = 1e-12;
  const std::size_t nx = r.num_prompts;
  const std::size_t ny = r.num_responses;
  TabularPolicy pi;
  pi.num_prompts = nx;
  pi.num_responses = ny;
  pi.p.assign(nx * ny, 0.0);

  for (std::size_t x = 0; x < nx; ++x) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < ny; ++y) {
      const double rv = r.at(x, y);
      if (!std::isfinite(rv)) throw std::invalid_argument("greedy_policy: non-finite reward");
      m = std::max(m, rv);
    }
    std::size_t ties = 0;
    for (std::size_t y = 0; y < ny; ++y)
      if (r.at(x, y) >= m - kTieTol) ++ties;
    for (std::size_t y = 0; y < ny; ++y)
      if (r.at(x, y) >= m - kTieTol) pi.at(x, y) = 1.0 / static_cast<double>(ties);
  }
  return pi;
}

double expected_kl(const TabularPolicy& pi, const TabularPolicy& pi_ref,
                   const PromptDistribution& rho) {
  if (pi.num_prompts != pi_ref.num_prompts || pi.num_responses != pi_ref.num_responses)
    throw std::invalid_argument("expected_kl: shape mismatch");
  double total = 0.0;
  for (std::size_t x = 0; x < pi.num_prompts; ++x) {
    double kl = 0.0;
    for (std::size_t y = 0; y < pi.num_responses; ++y) {
      const double q = pi.at(x, y);
      if (q == 0.0) continue;  // 0 log 0 = 0
      const double ref = pi_ref.at(x, y);
      if (ref <= 0.0) throw std::invalid_argument("expected_kl: support violation");
      kl += q * std::log(q / ref);
    }
    total += rho.weights[x] * kl;
  }
  return total;
}

TabularPolicy uniform_mixture(std::span<const TabularPolicy> policies) {
  if (policies.empty()) throw std::invalid_argument("uniform_mixture: empty input");
  if (policies.size() == 1) return policies[0];

  const std::size_t nx = policies[0].num_prompts;
  const std::size_t ny = policies[0].num_responses;
  TabularPolicy mix;
  mix.num_prompts = nx;
  mix.num_responses = ny;
  mix.p.assign(nx * ny, 0.0);
  for (const auto& pi : policies) {
    if (pi.num_prompts != nx || pi.num_responses != ny)
      throw std::invalid_argument("uniform_mixture: shape mismatch");
    for (std::size_t i = 0; i < mix.p.size(); ++i) mix.p[i] += pi.p[i];
  }
  const double inv = 1.0 / static_cast<double>(policies.size());
  for (auto& v : mix.p) v *= inv;
  // Renormalize rows exactly against FP drift in the sums.
  for (std::size_t x = 0; x < nx; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < ny; ++y) sum += mix.at(x, y);
    for (std::size_t y = 0; y < ny; ++y) mix.at(x, y) /= sum;
  }
  return mix;
}

double expected_reward(const TabularPolicy& pi, const RewardTable& r,
                       const PromptDistribution& rho) {
  double total = 0.0;
  for (std::size_t x = 0; x < pi.num_prompts; ++x) {
    double e = 0.0;
    for (std::size_t y = 0; y < pi.num_responses; ++y) e += pi.at(x, y) * r.at(x, y);
    total += rho.weights[x] * e;
  }
  return total;
}

std::size_t sample_response(const TabularPolicy& pi, std::size_t x, Rng& rng) {
  return rng.next_categorical(pi.row(x));
}

TabularPolicy skewed_reference(const Environment& env, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("skewed_reference: tau must be > 0");
  RewardTable neg = true_reward_table(env);
  for (auto& v : neg.r) v = -v;
  TabularPolicy uni = TabularPolicy::uniform(env.num_prompts(), env.num_responses());
  return kl_regularized_argmax(neg, uni, tau);
}

}  // namespace prefx
