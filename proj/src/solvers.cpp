#include "prefx/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "prefx/oracle.hpp"

namespace prefx {

SolverBackend parse_solver_backend(const std::string& s) {
  if (s == "enumerate") return SolverBackend::kEnumerate;
  if (s == "gradient") return SolverBackend::kGradient;
  throw std::invalid_argument("unknown solver backend: " + s);
}

std::string to_string(SolverBackend b) {
  return b == SolverBackend::kEnumerate ? "enumerate" : "gradient";
}

void SolverConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("SolverConfig: steps must be >= 1");
  if (warm_steps < 1) throw std::invalid_argument("SolverConfig: warm_steps must be >= 1");
  if (!(step_size > 0.0)) throw std::invalid_argument("SolverConfig: step_size must be > 0");
  if (!(tolerance > 0.0)) throw std::invalid_argument("SolverConfig: tolerance must be > 0");
}

void AlgorithmParams::validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("AlgorithmParams: alpha must be >= 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("AlgorithmParams: gamma must be >= 0");
  if (!(beta > 0.0)) throw std::invalid_argument("AlgorithmParams: beta must be > 0");
  if (T < 1) throw std::invalid_argument("AlgorithmParams: T must be >= 1");
  if (K < 1) throw std::invalid_argument("AlgorithmParams: K must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("AlgorithmParams: delta must be in (0,1)");
}

AlgorithmParams AlgorithmConfig::resolve(const Environment& env, std::size_t class_size) const {
  AlgorithmParams p;
  p.T = T;
  p.delta = delta;
  const double d = static_cast<double>(env.dim());
  const double n = static_cast<double>(std::max<std::size_t>(class_size, 2));
  const double log_class = std::log(n / delta);
  // T <= d makes the log factor nonpositive; the bonus degenerates to 0.
  const double log_t = std::max(0.0, std::log(static_cast<double>(T) / d));
  p.alpha = alpha.value_or(
      std::sqrt(d * log_t / (env.spec.r_max * static_cast<double>(T) * log_class)));
  p.gamma = gamma.value_or(2.0 * log_class);
  p.beta = beta.value_or(std::min(0.1, 1.0 / std::sqrt(static_cast<double>(T))));
  p.K = K.value_or(static_cast<int>(std::ceil(env.spec.r_max)));
  p.validate();
  return p;
}

EnumSelection select_enumerate(std::span<const double> losses, std::span<const double> bonuses,
                               double alpha, double gamma, bool use_indicator) {
  if (losses.empty()) throw std::invalid_argument("select_enumerate: empty class");

  double min_loss = losses[0];
  for (double l : losses) {
    if (!std::isfinite(l)) throw std::runtime_error("select_enumerate: non-finite loss");
    min_loss = std::min(min_loss, l);
  }

  EnumSelection best;
  bool have = false;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    const bool ind = !use_indicator || indicator_i(losses[i], min_loss, gamma);
    const double bonus_term = use_indicator ? (ind ? bonuses[i] : 0.0) : bonuses[i];
    const double obj = -losses[i] + alpha * bonus_term;
    if (!std::isfinite(obj)) throw std::runtime_error("select_enumerate: non-finite objective");
    if (!have || obj > best.objective) {
      best = {i, obj, losses[i], min_loss, bonuses[i], ind};
      have = true;
    }
  }
  return best;
}

ClassEval precompute_class_eval(const RewardClass& cls, const Environment& env,
                                const TabularPolicy& pi_ref, const TabularPolicy& pi_sam,
                                double beta, BonusKind kind) {
  ClassEval ce;
  ce.kind = kind;
  const std::size_t n = cls.size();
  ce.tables.reserve(n);
  ce.policies.reserve(n);
  ce.bonuses.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    ce.tables.push_back(make_reward_table(env, cls.members[i].theta));
    ce.policies.push_back(kl_regularized_argmax(ce.tables.back(), pi_ref, beta));
    switch (kind) {
      case BonusKind::kNone:
        break;
      case BonusKind::kPreference:
        ce.bonuses[i] = bonus_g(ce.tables[i], ce.policies[i], pi_sam, env.rho);
        break;
      case BonusKind::kPreferenceLight:
        ce.bonuses[i] = bonus_h(ce.policies[i], pi_ref, pi_sam, beta, env.rho);
        break;
      case BonusKind::kValue:
        ce.bonuses[i] = value_j(ce.tables[i], ce.policies[i], pi_ref, beta, env.rho);
        break;
    }
  }
  return ce;
}

namespace {

bool uses_indicator(BonusKind kind) {
  return kind == BonusKind::kPreference || kind == BonusKind::kPreferenceLight;
}

std::vector<double> class_losses(const ClassEval& ce, const PreferenceDataset& data) {
  std::vector<double> losses(ce.tables.size(), 0.0);
  for (std::size_t i = 0; i < ce.tables.size(); ++i) losses[i] = mle_loss(ce.tables[i], data);
  return losses;
}

SolveResult enumerate_solve(const RewardClass& cls, const PreferenceDataset& data,
                            const Environment& env, const TabularPolicy& pi_ref,
                            const TabularPolicy& pi_sam, const AlgorithmParams& params,
                            BonusKind kind) {
  const ClassEval ce = precompute_class_eval(cls, env, pi_ref, pi_sam, params.beta, kind);
  const auto losses = class_losses(ce, data);
  const double alpha = kind == BonusKind::kNone ? 0.0 : params.alpha;
  const auto sel =
      select_enumerate(losses, ce.bonuses, alpha, params.gamma, uses_indicator(kind));

  SolveResult res;
  res.index = sel.index;
  res.reward = cls.members[sel.index];
  if (kind != BonusKind::kNone) res.policy = ce.policies[sel.index];
  res.objective = sel.objective;
  res.loss = sel.loss;
  res.min_loss = sel.min_loss;
  res.bonus = sel.bonus;
  res.indicator = sel.indicator;
  res.analyzed_regime = true;
  return res;
}

// ---- gradient backend ----

double loss_at(const Environment& env, std::span<const double> theta,
               const PreferenceDataset& data) {
  return mle_loss(make_reward_table(env, theta), data);
}

// Analytic gradient of the MLE loss:
//   d/dtheta [-log sigma(<theta, dphi>)] = -sigma(-z) dphi.
std::vector<double> loss_gradient(const Environment& env, std::span<const double> theta,
                                  const PreferenceDataset& data) {
  const std::size_t d = theta.size();
  std::vector<double> g(d, 0.0);
  for (const auto& s : data.samples) {
    auto fw = env.features.at(s.x, s.y_w);
    auto fl = env.features.at(s.x, s.y_l);
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += theta[j] * (fw[j] - fl[j]);
    const double w = -sigmoid(-z);
    for (std::size_t j = 0; j < d; ++j) g[j] += w * (fw[j] - fl[j]);
  }
  return g;
}

void project_ball(std::vector<double>& theta, double radius) {
  double n2 = 0.0;
  for (double v : theta) n2 += v * v;
  const double n = std::sqrt(n2);
  if (n > radius) {
    const double scale = radius / n;
    for (auto& v : theta) v *= scale;
  }
}

// Projected ascent with per-step halving; deterministic. objective_fn must
// return the value to MAXIMIZE.
std::vector<double> projected_ascent(std::vector<double> theta, double radius,
                                     const SolverConfig& scfg, int max_steps,
                                     std::size_t dataset_size,
                                     const std::function<double(std::span<const double>)>& objective_fn,
                                     const std::function<std::vector<double>(std::span<const double>)>& gradient_fn) {
  const double eta0 = scfg.step_size / std::sqrt(1.0 + static_cast<double>(dataset_size));
  double f = objective_fn(theta);
  if (!std::isfinite(f)) throw std::runtime_error("gradient solver: non-finite objective");

  for (int step = 0; step < max_steps; ++step) {
    const auto g = gradient_fn(theta);
    double gnorm2 = 0.0;
    for (double v : g) {
      if (!std::isfinite(v)) throw std::runtime_error("gradient solver: non-finite gradient");
      gnorm2 += v * v;
    }
    if (gnorm2 == 0.0) break;

    double eta = eta0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h) {
      std::vector<double> cand(theta.size());
      for (std::size_t j = 0; j < theta.size(); ++j) cand[j] = theta[j] + eta * g[j];
      project_ball(cand, radius);
      const double fc = objective_fn(cand);
      if (std::isfinite(fc) && fc >= f) {
        const double gain = fc - f;
        theta = std::move(cand);
        f = fc;
        accepted = true;
        if (gain < scfg.tolerance * 1e-3) return theta;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;  // no ascent direction at any step size
  }
  return theta;
}

SolveResult gradient_solve(const PreferenceDataset& data, const Environment& env,
                           const TabularPolicy& pi_ref, const TabularPolicy& pi_sam,
                           const SolverConfig& scfg, const AlgorithmParams& params,
                           BonusKind kind, GradientLoopState* state = nullptr) {
  const double radius = scfg.radius(env);
  const std::size_t d = env.dim();
  const bool warm = state != nullptr && state->initialized;
  const int steps = warm ? scfg.warm_steps : scfg.steps;

  // MLE first; it anchors the truncation penalty and seeds the search.
  auto mle_theta = projected_ascent(
      warm ? state->theta_mle : std::vector<double>(d, 0.0), radius, scfg, steps, data.size(),
      [&](std::span<const double> th) { return -loss_at(env, th, data); },
      [&](std::span<const double> th) {
        auto g = loss_gradient(env, th, data);
        for (auto& v : g) v = -v;
        return g;
      });
  const double mle_loss_value = loss_at(env, mle_theta, data);

  auto raw_bonus = [&](std::span<const double> th) -> double {
    if (kind == BonusKind::kNone) return 0.0;
    const RewardTable t = make_reward_table(env, th);
    const TabularPolicy pi = kl_regularized_argmax(t, pi_ref, params.beta);
    switch (kind) {
      case BonusKind::kPreference:
        return bonus_g(t, pi, pi_sam, env.rho);
      case BonusKind::kPreferenceLight:
        return bonus_h(pi, pi_ref, pi_sam, params.beta, env.rho);
      case BonusKind::kValue:
        return value_j(t, pi, pi_ref, params.beta, env.rho);
      default:
        return 0.0;
    }
  };

  std::vector<double> theta;
  if (kind == BonusKind::kNone) {
    theta = mle_theta;
  } else {
    // Truncation enforced as a squared-hinge penalty around the MLE loss;
    // the hard indicator is not differentiable.
    const double lambda = 100.0 / std::max(params.gamma, 1e-6);
    const bool penalized = uses_indicator(kind);
    auto objective = [&](std::span<const double> th) -> double {
      const double l = loss_at(env, th, data);
      double f = -l + params.alpha * raw_bonus(th);
      if (penalized) {
        const double excess = std::max(0.0, l - mle_loss_value - params.gamma);
        f -= lambda * excess * excess;
      }
      return f;
    };
    auto gradient = [&](std::span<const double> th) -> std::vector<double> {
      const auto lg = loss_gradient(env, th, data);
      std::vector<double> g(th.size());
      for (std::size_t j = 0; j < th.size(); ++j) g[j] = -lg[j];
      if (penalized) {
        const double excess = std::max(0.0, loss_at(env, th, data) - mle_loss_value - params.gamma);
        if (excess > 0.0)
          for (std::size_t j = 0; j < th.size(); ++j) g[j] -= 2.0 * lambda * excess * lg[j];
      }
      // Central differences for the bonus term; it depends on theta through
      // the closed-form policy.
      std::vector<double> probe(th.begin(), th.end());
      for (std::size_t j = 0; j < th.size(); ++j) {
        const double h = 1e-5 * (1.0 + std::abs(th[j]));
        probe[j] = th[j] + h;
        const double fp = raw_bonus(probe);
        probe[j] = th[j] - h;
        const double fm = raw_bonus(probe);
        probe[j] = th[j];
        g[j] += params.alpha * (fp - fm) / (2.0 * h);
      }
      return g;
    };
    theta = projected_ascent(warm ? state->theta : mle_theta, radius, scfg, steps, data.size(),
                             objective, gradient);
  }

  if (state != nullptr) {
    state->theta_mle = mle_theta;
    state->theta = theta;
    state->initialized = true;
  }

  SolveResult res;
  res.index = SolveResult::npos;
  res.reward.theta = theta;
  res.loss = loss_at(env, theta, data);
  res.min_loss = std::min(mle_loss_value, res.loss);
  res.bonus = raw_bonus(theta);
  res.indicator = kind == BonusKind::kNone || !uses_indicator(kind)
                      ? true
                      : indicator_i(res.loss, res.min_loss, params.gamma);
  const double alpha = kind == BonusKind::kNone ? 0.0 : params.alpha;
  const double bonus_term = uses_indicator(kind) ? (res.indicator ? res.bonus : 0.0) : res.bonus;
  res.objective = -res.loss + alpha * bonus_term;
  if (kind != BonusKind::kNone)
    res.policy = kl_regularized_argmax(make_reward_table(env, theta), pi_ref, params.beta);
  res.analyzed_regime = false;
  return res;
}

}  // namespace

SolveResult solve_mle(const RewardClass& cls, const PreferenceDataset& data,
                      const Environment& env, const SolverConfig& scfg) {
  scfg.validate();
  if (scfg.backend == SolverBackend::kEnumerate) {
    AlgorithmParams dummy;  // alpha ignored for the pure MLE objective
    const TabularPolicy uni = TabularPolicy::uniform(env.num_prompts(), env.num_responses());
    SolveResult res = enumerate_solve(cls, data, env, uni, uni, dummy, BonusKind::kNone);
    res.policy = TabularPolicy{};
    return res;
  }
  AlgorithmParams dummy;
  const TabularPolicy uni = TabularPolicy::uniform(env.num_prompts(), env.num_responses());
  SolveResult res = gradient_solve(data, env, uni, uni, scfg, dummy, BonusKind::kNone);
  res.policy = TabularPolicy{};
  return res;
}

SolveResult solve_popo(const RewardClass& cls, const PreferenceDataset& data,
                       const Environment& env, const TabularPolicy& pi_ref,
                       const TabularPolicy& pi_sam, const SolverConfig& scfg,
                       const AlgorithmParams& params) {
  scfg.validate();
  params.validate();
  if (scfg.backend == SolverBackend::kEnumerate)
    return enumerate_solve(cls, data, env, pi_ref, pi_sam, params, BonusKind::kPreference);
  return gradient_solve(data, env, pi_ref, pi_sam, scfg, params, BonusKind::kPreference);
}

SolveResult solve_popo_light(const RewardClass& cls, const PreferenceDataset& data,
                             const Environment& env, const TabularPolicy& pi_ref,
                             const TabularPolicy& pi_sam, const SolverConfig& scfg,
                             const AlgorithmParams& params) {
  scfg.validate();
  params.validate();
  if (scfg.backend == SolverBackend::kEnumerate)
    return enumerate_solve(cls, data, env, pi_ref, pi_sam, params, BonusKind::kPreferenceLight);
  return gradient_solve(data, env, pi_ref, pi_sam, scfg, params, BonusKind::kPreferenceLight);
}

SolveResult solve_xpo(const RewardClass& cls, const PreferenceDataset& data,
                      const Environment& env, const TabularPolicy& pi_ref,
                      const SolverConfig& scfg, const AlgorithmParams& params) {
  scfg.validate();
  params.validate();
  if (scfg.backend == SolverBackend::kEnumerate)
    return enumerate_solve(cls, data, env, pi_ref, pi_ref, params, BonusKind::kValue);
  return gradient_solve(data, env, pi_ref, pi_ref, scfg, params, BonusKind::kValue);
}

SolveResult solve_gradient_step(BonusKind kind, const PreferenceDataset& data,
                                const Environment& env, const TabularPolicy& pi_ref,
                                const TabularPolicy& pi_sam, const SolverConfig& scfg,
                                const AlgorithmParams& params, GradientLoopState& state) {
  scfg.validate();
  params.validate();
  return gradient_solve(data, env, pi_ref, pi_sam, scfg, params, kind, &state);
}

}  // namespace prefx
