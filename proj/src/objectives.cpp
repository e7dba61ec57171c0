#include "prefx/objectives.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace prefx {

namespace {

const int kHaltonPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                             41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

double halton(std::size_t index, int base) {
  double f = 1.0, r = 0.0;
  std::size_t i = index;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

// Acklam's rational approximation of the inverse normal CDF; relative
// error below 1.2e-9, plenty for quasi-random placement.
double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double t = q * q;
  return (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * q /
         (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
}

}  // namespace

RewardClass make_reward_class(const Environment& env, std::size_t size) {
  if (size < 1) throw std::invalid_argument("make_reward_class: size must be >= 1");
  const std::size_t d = env.dim();
  if (d + 1 > sizeof(kHaltonPrimes) / sizeof(kHaltonPrimes[0]))
    throw std::invalid_argument("make_reward_class: dimension too large for Halton bases");

  RewardClass cls;
  cls.members.reserve(size);

  // size - 1 Halton points in the ball: gaussianized direction, radius by
  // the u^(1/d) law. Index offset skips the degenerate first point.
  for (std::size_t i = 0; i + 1 < size; ++i) {
    std::vector<double> theta(d);
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double u = halton(i + 1, kHaltonPrimes[j]);
      u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
      theta[j] = inverse_normal_cdf(u);
      norm += theta[j] * theta[j];
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) norm = 1.0;
    const double u_r = halton(i + 1, kHaltonPrimes[d]);
    const double radius = env.spec.r_max * std::pow(u_r, 1.0 / static_cast<double>(d));
    for (auto& t : theta) t *= radius / norm;
    cls.members.push_back({std::move(theta)});
  }

  // Truth goes last so that all-zero-loss ties resolve to a net member.
  cls.members.push_back({env.truth.theta_star});
  cls.contains_truth = true;
  cls.truth_index = cls.members.size() - 1;
  return cls;
}

double mle_loss_term(const RewardTable& r, const PreferenceSample& s) {
  return -log_sigmoid(r.at(s.x, s.y_w) - r.at(s.x, s.y_l));
}

double mle_loss(const RewardTable& r, const PreferenceDataset& data) {
  double loss = 0.0;
  for (const auto& s : data.samples) loss += mle_loss_term(r, s);
  return loss;
}

double dpo_loss(const TabularPolicy& pi, const TabularPolicy& pi_ref, double beta,
                const PreferenceDataset& data) {
  double loss = 0.0;
  for (const auto& s : data.samples)
    loss += -log_sigmoid(implicit_reward_gap(pi, pi_ref, beta, s.x, s.y_w, s.y_l));
  return loss;
}

double value_j(const RewardTable& r, const TabularPolicy& pi, const TabularPolicy& pi_ref,
               double beta, const PromptDistribution& rho) {
  return expected_reward(pi, r, rho) - beta * expected_kl(pi, pi_ref, rho);
}

double bonus_g(const RewardTable& r, const TabularPolicy& pi, const TabularPolicy& pi_sam,
               const PromptDistribution& rho) {
  double total = 0.0;
  const std::size_t ny = r.num_responses;
  for (std::size_t x = 0; x < r.num_prompts; ++x) {
    double gx = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      const double py = pi.at(x, y);
      if (py == 0.0) continue;
      const double ry = r.at(x, y);
      double inner = 0.0;
      for (std::size_t yp = 0; yp < ny; ++yp) {
        const double q = pi_sam.at(x, yp);
        if (q == 0.0) continue;
        inner += q * sigmoid(ry - r.at(x, yp));
      }
      gx += py * inner;
    }
    total += rho.weights[x] * gx;
  }
  return total;
}

double bonus_g_mc(const RewardTable& r, const TabularPolicy& pi, const TabularPolicy& pi_sam,
                  const PromptDistribution& rho, std::size_t num_samples, Rng& rng) {
  if (num_samples == 0) throw std::invalid_argument("bonus_g_mc: num_samples must be >= 1");
  double total = 0.0;
  for (std::size_t n = 0; n < num_samples; ++n) {
    const std::size_t x = rng.next_categorical(rho.weights);
    const std::size_t y = sample_response(pi, x, rng);
    const std::size_t yp = sample_response(pi_sam, x, rng);
    total += sigmoid(r.at(x, y) - r.at(x, yp));
  }
  return total / static_cast<double>(num_samples);
}

double bonus_g_policy(const TabularPolicy& pi, const TabularPolicy& pi_ref,
                      const TabularPolicy& pi_sam, double beta, const PromptDistribution& rho) {
  const std::size_t ny = pi.num_responses;
  std::vector<double> log_ratio(ny);
  double total = 0.0;
  for (std::size_t x = 0; x < pi.num_prompts; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double p = pi.at(x, y);
      const double ref = pi_ref.at(x, y);
      if (p > 0.0 && ref <= 0.0)
        throw std::invalid_argument("bonus_g_policy: support violation");
      log_ratio[y] = p > 0.0 ? std::log(p / ref) : 0.0;
    }
    double gx = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      const double py = pi.at(x, y);
      if (py == 0.0) continue;
      double inner = 0.0;
      for (std::size_t yp = 0; yp < ny; ++yp) {
        const double q = pi_sam.at(x, yp);
        if (q == 0.0) continue;
        if (pi.at(x, yp) <= 0.0)
          throw std::invalid_argument("bonus_g_policy: support violation");
        inner += q * sigmoid(beta * (log_ratio[y] - log_ratio[yp]));
      }
      gx += py * inner;
    }
    total += rho.weights[x] * gx;
  }
  return total;
}

double bonus_h(const TabularPolicy& pi, const TabularPolicy& pi_ref,
               const TabularPolicy& pi_sam, double beta, const PromptDistribution& rho) {
  double total = 0.0;
  for (std::size_t x = 0; x < pi.num_prompts; ++x) {
    double hx = 0.0;
    for (std::size_t yp = 0; yp < pi.num_responses; ++yp) {
      const double q = pi_sam.at(x, yp);
      if (q == 0.0) continue;
      const double p = pi.at(x, yp);
      const double ref = pi_ref.at(x, yp);
      if (p <= 0.0 || ref <= 0.0) throw std::invalid_argument("bonus_h: support violation");
      hx += q * sigmoid(-beta * std::log(p / ref));
    }
    total += rho.weights[x] * hx;
  }
  return total;
}

bool indicator_i(double loss_r, double min_class_loss, double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("indicator_i: gamma must be >= 0");
  return loss_r - min_class_loss <= gamma;
}

bool indicator_i(const RewardTable& r, const RewardClass& cls, const Environment& env,
                 const PreferenceDataset& data, double gamma) {
  double min_loss = std::numeric_limits<double>::infinity();
  for (const auto& m : cls.members) {
    const RewardTable t = make_reward_table(env, m.theta);
    min_loss = std::min(min_loss, mle_loss(t, data));
  }
  return indicator_i(mle_loss(r, data), min_loss, gamma);
}

}  // namespace prefx
