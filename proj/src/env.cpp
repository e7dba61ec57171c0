#include "prefx/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace prefx {

namespace {

constexpr int kResampleCap = 10000;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::vector<double> gaussian_vector(Rng& rng, std::size_t d) {
  std::vector<double> g(d);
  for (auto& v : g) v = rng.next_normal();
  return g;
}

// Unit vector uniform on the sphere; rejects near-zero gaussians.
std::vector<double> unit_vector(Rng& rng, std::size_t d) {
  for (int attempt = 0; attempt < kResampleCap; ++attempt) {
    auto g = gaussian_vector(rng, d);
    const double n = norm2(g);
    if (n > 1e-9) {
      for (auto& v : g) v /= n;
      return g;
    }
  }
  throw std::runtime_error("unit_vector: resample cap exceeded");
}

// Unit vector orthogonal to the given unit direction (requires d >= 2).
std::vector<double> unit_orthogonal(Rng& rng, std::span<const double> u) {
  for (int attempt = 0; attempt < kResampleCap; ++attempt) {
    auto g = gaussian_vector(rng, u.size());
    const double c = dot(g, u);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= c * u[i];
    const double n = norm2(g);
    if (n > 1e-9) {
      for (auto& v : g) v /= n;
      return g;
    }
  }
  throw std::runtime_error("unit_orthogonal: resample cap exceeded");
}

}  // namespace

void EnvironmentSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("EnvironmentSpec: dim must be >= 1");
  if (num_prompts < 1) throw std::invalid_argument("EnvironmentSpec: num_prompts must be >= 1");
  if (num_responses < 2) throw std::invalid_argument("EnvironmentSpec: num_responses must be >= 2");
  if (!(r_max >= 1.0)) throw std::invalid_argument("EnvironmentSpec: r_max must be >= 1");
}

void PromptDistribution::validate() const {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::runtime_error("PromptDistribution: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::runtime_error("PromptDistribution: weights do not sum to 1");
}

GeneratorMode parse_generator_mode(const std::string& s) {
  if (s == "uniform-random") return GeneratorMode::kUniformRandom;
  if (s == "hard-gap") return GeneratorMode::kHardGap;
  throw std::invalid_argument("unknown generator mode: " + s);
}

RhoMode parse_rho_mode(const std::string& s) {
  if (s == "uniform") return RhoMode::kUniform;
  if (s == "random") return RhoMode::kRandom;
  throw std::invalid_argument("unknown rho mode: " + s);
}

std::string to_string(GeneratorMode m) {
  return m == GeneratorMode::kUniformRandom ? "uniform-random" : "hard-gap";
}

std::string to_string(RhoMode m) { return m == RhoMode::kUniform ? "uniform" : "random"; }

double Environment::reward(std::size_t x, std::size_t y) const {
  if (x >= spec.num_prompts || y >= spec.num_responses)
    throw std::out_of_range("Environment::reward: index out of range");
  return dot(features.at(x, y), truth.theta_star) + truth.offsets[x];
}

std::size_t Environment::sample_prompt(Rng& rng) const {
  return rng.next_categorical(rho.weights);
}

void Environment::validate() const {
  spec.validate();
  rho.validate();
  if (rho.weights.size() != spec.num_prompts)
    throw std::runtime_error("Environment: rho size mismatch");
  if (truth.theta_star.size() != spec.dim || truth.offsets.size() != spec.num_prompts)
    throw std::runtime_error("Environment: truth shape mismatch");
  if (norm2(truth.theta_star) > spec.r_max + 1e-9)
    throw std::runtime_error("Environment: ||theta*|| exceeds r_max");

  for (std::size_t x = 0; x < spec.num_prompts; ++x) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < spec.num_responses; ++y) {
      if (norm2(features.at(x, y)) > 0.5 + 1e-9)
        throw std::runtime_error("Environment: ||phi|| exceeds 1/2");
      const double r = reward(x, y);
      if (r < -1e-9 || r > spec.r_max + 1e-9)
        throw std::runtime_error("Environment: reward outside [0, r_max]");
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    if (mode == GeneratorMode::kHardGap && hi - lo < 0.9 * spec.r_max - 1e-9)
      throw std::runtime_error("Environment: hard-gap spread below 0.9 * r_max");
  }
}

Environment generate_environment(const EnvironmentSpec& spec, GeneratorMode mode,
                                 RhoMode rho_mode) {
  spec.validate();
  Rng rng(spec.seed);

  const std::size_t d = spec.dim;
  const std::size_t nx = spec.num_prompts;
  const std::size_t ny = spec.num_responses;

  Environment env;
  env.spec = spec;
  env.mode = mode;
  env.features.num_prompts = nx;
  env.features.num_responses = ny;
  env.features.dim = d;
  env.features.phi.assign(nx * ny * d, 0.0);

  auto phi_at = [&](std::size_t x, std::size_t y) {
    return env.features.phi.data() + (x * ny + y) * d;
  };

  if (mode == GeneratorMode::kUniformRandom) {
    // theta* uniform in the r_max ball.
    auto dir = unit_vector(rng, d);
    const double r_theta = spec.r_max * std::pow(rng.next_double(), 1.0 / static_cast<double>(d));
    env.truth.theta_star.resize(d);
    for (std::size_t j = 0; j < d; ++j) env.truth.theta_star[j] = r_theta * dir[j];

    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        auto fdir = unit_vector(rng, d);
        const double r_phi = 0.5 * std::pow(rng.next_double(), 1.0 / static_cast<double>(d));
        double* p = phi_at(x, y);
        for (std::size_t j = 0; j < d; ++j) p[j] = r_phi * fdir[j];
      }
    }
  } else {
    // Hard gap: theta* sits on the r_max sphere (direction u); each prompt
    // plants an aligned low/high pair at spread s * r_max, s in [0.9, 1].
    // Every other response lives on a per-prompt ray w_x that is only
    // half-aligned with u (<u, w_x> = 1/2): a ladder over the middle of
    // the range plus two decoys at the top of the ray. True rewards rank
    // the aligned best response ~0.2 r_max above the decoys, but any
    // reward estimate calibrated only on ray-internal comparisons ranks a
    // decoy first and predicts every ray pair correctly, so it is
    // falsified only by comparisons that actually involve the top
    // responses. With a weak sampler those pairs are exponentially rare
    // in r_max; a self-updated sampler produces them at constant rate.
    auto u_dir = unit_vector(rng, d);
    env.truth.theta_star.resize(d);
    for (std::size_t j = 0; j < d; ++j) env.truth.theta_star[j] = spec.r_max * u_dir[j];

    constexpr double kRayAlign = 0.5;  // <u, w_x>
    const double orth_scale = std::sqrt(1.0 - kRayAlign * kRayAlign);
    const std::size_t decoys = std::min<std::size_t>(2, ny - 2);
    for (std::size_t x = 0; x < nx; ++x) {
      const double s = 0.9 + 0.1 * rng.next_double();
      // Distinct special indices via a partial shuffle: slot 0 = best,
      // slot 1 = worst, slots 2.. = decoys.
      std::vector<std::size_t> order(ny);
      for (std::size_t y = 0; y < ny; ++y) order[y] = y;
      for (std::size_t k = 0; k < decoys + 2; ++k) {
        const auto pick =
            k + static_cast<std::size_t>(rng.next_double() * static_cast<double>(ny - k)) %
                    (ny - k);
        std::swap(order[k], order[pick]);
      }
      std::vector<std::size_t> role(ny, 3);  // 0 best, 1 worst, 2 decoy, 3 rung
      role[order[0]] = 0;
      role[order[1]] = 1;
      for (std::size_t k = 0; k < decoys; ++k) role[order[2 + k]] = 2;

      // w_x = align * u + sqrt(1 - align^2) * o_x; collapses to u at d = 1.
      std::vector<double> w_dir(u_dir.begin(), u_dir.end());
      if (d > 1) {
        auto odir = unit_orthogonal(rng, u_dir);
        for (std::size_t j = 0; j < d; ++j)
          w_dir[j] = kRayAlign * u_dir[j] + orth_scale * odir[j];
      }

      for (std::size_t y = 0; y < ny; ++y) {
        double* p = phi_at(x, y);
        if (role[y] == 0 || role[y] == 1) {
          const double c = (role[y] == 0 ? 0.5 : -0.5) * s;
          for (std::size_t j = 0; j < d; ++j) p[j] = c * u_dir[j];
          continue;
        }
        // Decoys crowd the top of the ray; rungs ladder its middle band,
        // skewed toward the band floor and high enough above the worst
        // response that bottom-anchored comparisons saturate once r_max
        // is large.
        double c;
        if (role[y] == 2) {
          c = 0.42 + 0.08 * rng.next_double();
        } else {
          const double v = rng.next_double();
          c = -0.15 + 0.43 * v * v;
        }
        for (std::size_t j = 0; j < d; ++j) p[j] = c * w_dir[j];
      }
    }
  }

  // Shift each prompt's minimum reward to exactly 0.
  env.truth.offsets.assign(nx, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < ny; ++y)
      lo = std::min(lo, dot(env.features.at(x, y), env.truth.theta_star));
    env.truth.offsets[x] = -lo;
  }

  if (rho_mode == RhoMode::kUniform) {
    env.rho.weights.assign(nx, 1.0 / static_cast<double>(nx));
  } else {
    env.rho.weights.resize(nx);
    double sum = 0.0;
    for (auto& w : env.rho.weights) {
      w = 0.05 + rng.next_double();
      sum += w;
    }
    for (auto& w : env.rho.weights) w /= sum;
  }

  env.validate();
  return env;
}

}  // namespace prefx
