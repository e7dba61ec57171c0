#include "prefx/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prefx/oracle.hpp"
#include "prefx/policy.hpp"

namespace prefx {

namespace {

// FP guard on inequalities that hold with genuine analytic slack.
constexpr double kFpTol = 1e-12;

double default_step(double r_max) { return r_max <= 4.0 ? 0.01 : 0.05; }

TabularPolicy random_full_support_policy(std::size_t nx, std::size_t ny, Rng& rng) {
  TabularPolicy pi;
  pi.num_prompts = nx;
  pi.num_responses = ny;
  pi.p.resize(nx * ny);
  for (std::size_t x = 0; x < nx; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      // Exponential draws give a flat Dirichlet row.
      const double e = -std::log(1.0 - rng.next_double());
      pi.at(x, y) = e;
      sum += e;
    }
    for (std::size_t y = 0; y < ny; ++y) pi.at(x, y) /= sum;
  }
  return pi;
}

std::vector<double> random_theta(double radius, std::size_t d, Rng& rng) {
  std::vector<double> theta(d);
  double n2 = 0.0;
  for (auto& v : theta) {
    v = rng.next_normal();
    n2 += v * v;
  }
  const double n = std::sqrt(n2);
  const double r = radius * std::pow(rng.next_double(), 1.0 / static_cast<double>(d));
  for (auto& v : theta) v *= n > 1e-12 ? r / n : 0.0;
  return theta;
}

}  // namespace

CheckReport check_p2r_reduction(double r_max, double grid_step) {
  if (!(r_max >= 1.0)) throw std::invalid_argument("check_p2r_reduction: r_max must be >= 1");
  const double step = grid_step > 0.0 ? grid_step : default_step(r_max);

  const auto n = static_cast<long>(std::llround(r_max / step));
  const auto limit = static_cast<long>(std::llround(1.0 / step));  // b - c <= 1, inclusive

  // sigma over all index differences in [-n, n].
  std::vector<double> sig(2 * n + 1);
  for (long i = -n; i <= n; ++i) sig[i + n] = sigmoid(static_cast<double>(i) * step);

  CheckReport rep;
  rep.name = "p2r_reduction";
  rep.stats["r_max"] = r_max;
  rep.stats["grid_step"] = step;

  const double scale = 20.0 * r_max;
  for (long ia = 0; ia <= n; ++ia) {
    for (long ib = 0; ib <= ia; ++ib) {
      const double lhs = static_cast<double>(ia - ib) * step;
      const long ic_min = std::max<long>(0, ib - limit);
      for (long ic = ic_min; ic <= ia; ++ic) {
        ++rep.cases_checked;
        const double sdiff = sig[ia - ic + n] - sig[ib - ic + n];
        const double rhs = scale * sdiff;
        if (lhs > rhs + kFpTol) {
          ++rep.violations;
          if (rep.witness.empty())
            rep.witness = {static_cast<double>(ia) * step, static_cast<double>(ib) * step,
                           static_cast<double>(ic) * step};
        }
        if (lhs > 0.0 && sdiff > 0.0)
          rep.max_ratio = std::max(rep.max_ratio, lhs / (r_max * sdiff));
      }
    }
  }
  rep.pass = rep.violations == 0;
  rep.stats["observed_constant"] = rep.max_ratio;  // lemma asserts <= 20
  return rep;
}

CheckReport check_sigmoid_link(double r_max, double grid_step) {
  if (!(r_max >= 1.0)) throw std::invalid_argument("check_sigmoid_link: r_max must be >= 1");
  const double step = grid_step > 0.0 ? grid_step : default_step(r_max);
  const auto n = static_cast<long>(std::llround(0.5 * r_max / step));

  std::vector<double> sig(2 * n + 1), dsig(2 * n + 1);
  for (long i = -n; i <= n; ++i) {
    const double z = static_cast<double>(i) * step;
    sig[i + n] = sigmoid(z);
    dsig[i + n] = sigmoid_deriv(z);
  }

  CheckReport rep;
  rep.name = "sigmoid_link";
  rep.stats["r_max"] = r_max;
  rep.stats["grid_step"] = step;

  for (long ia = -n; ia <= n; ++ia) {
    for (long ib = -n; ib <= n; ++ib) {
      ++rep.cases_checked;
      const double lhs = dsig[ia + n] * std::abs(static_cast<double>(ia - ib)) * step;
      const double sdiff = std::abs(sig[ia + n] - sig[ib + n]);
      if (lhs > 3.0 * r_max * sdiff + kFpTol) {
        ++rep.violations;
        if (rep.witness.empty())
          rep.witness = {static_cast<double>(ia) * step, static_cast<double>(ib) * step};
      }
      if (ia != ib && sdiff > 0.0)
        rep.max_ratio = std::max(rep.max_ratio, lhs / (r_max * sdiff));
    }
  }
  rep.pass = rep.violations == 0;
  rep.stats["observed_constant"] = rep.max_ratio;  // lemma asserts <= 3
  return rep;
}

CheckReport check_gh_gap(const Environment& env, const RewardClass& cls, double beta,
                         int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_gh_gap: trials must be >= 1");
  CheckReport rep;
  rep.name = "gh_gap";
  rep.stats["beta"] = beta;

  const TabularPolicy pi_ref = TabularPolicy::uniform(env.num_prompts(), env.num_responses());
  Rng rng = Rng(seed).split(0x6847);

  for (int t = 0; t < trials; ++t) {
    ++rep.cases_checked;
    const auto idx = static_cast<std::size_t>(rng.next_double() * static_cast<double>(cls.size())) %
                     cls.size();
    const RewardTable table = make_reward_table(env, cls.members[idx].theta);
    const TabularPolicy pi_sam =
        random_full_support_policy(env.num_prompts(), env.num_responses(), rng);

    double g, h, rhs;
    if (beta == 0.0) {
      // Degenerate regularization: every implicit log-ratio vanishes, so
      // both bonuses sit at 1/2 and the bound collapses to 0.
      g = bonus_g_policy(pi_ref, pi_ref, pi_sam, 0.0, env.rho);
      h = bonus_h(pi_ref, pi_ref, pi_sam, 0.0, env.rho);
      rhs = 0.0;
    } else {
      const TabularPolicy pi_r = kl_regularized_argmax(table, pi_ref, beta);
      g = bonus_g(table, pi_r, pi_sam, env.rho);
      h = bonus_h(pi_r, pi_ref, pi_sam, beta, env.rho);
      rhs = 0.5 * beta * expected_kl(greedy_policy(table), pi_ref, env.rho);
    }
    const double lhs = std::abs(g - h);
    if (lhs > rhs + kFpTol) {
      ++rep.violations;
      if (rep.witness.empty())
        rep.witness = {static_cast<double>(idx), g, h, rhs};
    }
    if (rhs > 0.0) rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
  }
  rep.pass = rep.violations == 0;
  return rep;
}

CheckReport check_dpo_identity(const Environment& env, double beta, int trials,
                               std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_dpo_identity: trials must be >= 1");
  CheckReport rep;
  rep.name = "dpo_identity";
  rep.stats["beta"] = beta;

  Rng rng = Rng(seed).split(0xD90);
  const std::size_t nx = env.num_prompts();
  const std::size_t ny = env.num_responses();
  double max_err = 0.0;

  for (int t = 0; t < trials; ++t) {
    const auto theta = random_theta(env.spec.r_max, env.dim(), rng);
    const RewardTable table = make_reward_table(env, theta);
    const TabularPolicy pi_ref = random_full_support_policy(nx, ny, rng);
    const TabularPolicy pi = kl_regularized_argmax(table, pi_ref, beta);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t yp = 0; yp < ny; ++yp) {
          ++rep.cases_checked;
          const double gap = implicit_reward_gap(pi, pi_ref, beta, x, y, yp);
          const double err = std::abs(gap - (table.at(x, y) - table.at(x, yp)));
          max_err = std::max(max_err, err);
          if (err > 1e-9) {
            ++rep.violations;
            if (rep.witness.empty())
              rep.witness = {static_cast<double>(x), static_cast<double>(y),
                             static_cast<double>(yp), err};
          }
        }
      }
    }
  }
  rep.pass = rep.violations == 0;
  rep.stats["max_abs_error"] = max_err;
  return rep;
}

CheckReport check_mle_concentration(const Environment& env, const RewardClass& cls,
                                    const std::vector<std::size_t>& n_grid, int trials,
                                    double delta, std::uint64_t seed) {
  if (trials < 50) throw std::invalid_argument("check_mle_concentration: trials must be >= 50");
  if (!cls.contains_truth)
    throw std::invalid_argument("check_mle_concentration: class must contain theta*");

  const std::size_t nx = env.num_prompts();
  const std::size_t ny = env.num_responses();
  const std::size_t cells = nx * ny * ny;
  const std::size_t m = cls.size();
  const double slack = 2.0 * std::log(static_cast<double>(m) / delta);

  // Per member: loss term per (x, y_w, y_l) cell and the exact population
  // squared preference error under the (pi_ref, pi_ref) sampling protocol.
  const TabularPolicy pi_ref = TabularPolicy::uniform(nx, ny);
  const RewardTable truth = true_reward_table(env);
  std::vector<std::vector<double>> term(m, std::vector<double>(cells));
  std::vector<double> pop_sq(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const RewardTable table = make_reward_table(env, cls.members[i].theta);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t yw = 0; yw < ny; ++yw) {
        for (std::size_t yl = 0; yl < ny; ++yl) {
          term[i][(x * ny + yw) * ny + yl] = -log_sigmoid(table.at(x, yw) - table.at(x, yl));
        }
      }
    }
    double e = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      double ex = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t yp = 0; yp < ny; ++yp) {
          const double d =
              sigmoid(truth.at(x, y) - truth.at(x, yp)) - sigmoid(table.at(x, y) - table.at(x, yp));
          ex += pi_ref.at(x, y) * pi_ref.at(x, yp) * d * d;
        }
      }
      e += env.rho.weights[x] * ex;
    }
    pop_sq[i] = e;
  }

  CheckReport rep;
  rep.name = "mle_concentration";
  rep.deterministic = false;
  rep.stats["delta"] = delta;
  rep.stats["trials"] = trials;
  const double threshold =
      delta + 2.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
  rep.stats["threshold"] = threshold;

  Rng base = Rng(seed).split(0x31E);
  double worst_freq = 0.0;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const std::size_t n = n_grid[gi];
    int violated_trials = 0;
    for (int t = 0; t < trials; ++t) {
      Rng rng = base.split(gi * 100003 + static_cast<std::size_t>(t));
      std::vector<std::uint32_t> count(cells, 0);
      std::vector<std::size_t> used;
      used.reserve(std::min(n, cells));
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t x = env.sample_prompt(rng);
        const std::size_t y1 = sample_response(pi_ref, x, rng);
        const std::size_t y2 = sample_response(pi_ref, x, rng);
        const PreferenceSample smp = label(env, x, y1, y2, rng);
        const std::size_t cell = (smp.x * ny + smp.y_w) * ny + smp.y_l;
        if (count[cell]++ == 0) used.push_back(cell);
      }

      double loss_truth = 0.0;
      for (const std::size_t c : used)
        loss_truth += static_cast<double>(count[c]) * term[cls.truth_index][c];

      bool violated = false;
      for (std::size_t i = 0; i < m && !violated; ++i) {
        double loss_i = 0.0;
        for (const std::size_t c : used) loss_i += static_cast<double>(count[c]) * term[i][c];
        const double lhs = loss_truth - loss_i;
        const double rhs = -0.5 * static_cast<double>(n) * pop_sq[i] + slack;
        if (lhs > rhs + kFpTol) violated = true;
      }
      if (violated) ++violated_trials;
    }
    const double freq = static_cast<double>(violated_trials) / static_cast<double>(trials);
    rep.stats["freq_n" + std::to_string(n)] = freq;
    worst_freq = std::max(worst_freq, freq);
    rep.cases_checked += static_cast<std::uint64_t>(trials);
    rep.violations += static_cast<std::uint64_t>(violated_trials);
  }
  rep.stats["worst_freq"] = worst_freq;
  rep.pass = worst_freq <= threshold;
  return rep;
}

std::vector<CheckReport> run_verify_suite(const Environment& env, const RewardClass& cls,
                                          const VerifySettings& settings) {
  std::vector<CheckReport> reports;
  for (double r : settings.r_max_list) {
    auto rep = check_p2r_reduction(r, settings.grid_step);
    rep.name += "_rmax" + std::to_string(static_cast<int>(r));
    reports.push_back(std::move(rep));
  }
  for (double r : settings.r_max_list) {
    auto rep = check_sigmoid_link(r, settings.grid_step);
    rep.name += "_rmax" + std::to_string(static_cast<int>(r));
    reports.push_back(std::move(rep));
  }
  int salt = 0;
  for (double beta : settings.beta_list) {
    auto rep = check_gh_gap(env, cls, beta, settings.gh_trials, settings.seed + salt);
    rep.name += "_beta" + std::to_string(salt);
    ++salt;
    reports.push_back(std::move(rep));
  }
  reports.push_back(check_dpo_identity(env, settings.beta_list.empty() ? 0.1 : settings.beta_list.back(),
                                       settings.dpo_trials, settings.seed + 100));
  reports.push_back(check_mle_concentration(env, cls, settings.mle_n_grid, settings.mle_trials,
                                            settings.delta, settings.seed + 200));
  return reports;
}

}  // namespace prefx
