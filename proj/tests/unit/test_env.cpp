#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "prefx/env.hpp"
#include "test_util.hpp"

using namespace prefx;

namespace {

double spread(const Environment& env, std::size_t x) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t y = 0; y < env.num_responses(); ++y) {
    lo = std::min(lo, env.reward(x, y));
    hi = std::max(hi, env.reward(x, y));
  }
  return hi - lo;
}

}  // namespace

TEST_CASE("spec invariants are enforced") {
  CHECK_THROWS_AS(generate_environment({0, 1, 2, 1.0, 0}, GeneratorMode::kUniformRandom),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_environment({1, 0, 2, 1.0, 0}, GeneratorMode::kUniformRandom),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_environment({1, 1, 1, 1.0, 0}, GeneratorMode::kUniformRandom),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_environment({1, 1, 2, 0.5, 0}, GeneratorMode::kUniformRandom),
                  std::invalid_argument);
}

TEST_CASE("minimal hard-gap instance plants rewards near {0, r_max}") {
  const Environment env = generate_environment({1, 1, 2, 1.0, 3}, GeneratorMode::kHardGap);
  double lo = std::min(env.reward(0, 0), env.reward(0, 1));
  double hi = std::max(env.reward(0, 0), env.reward(0, 1));
  CHECK(std::abs(lo) < 1e-12);
  CHECK(hi >= 0.9);
  CHECK(hi <= 1.0 + 1e-12);
}

TEST_CASE("generation is bitwise deterministic in the seed") {
  const EnvironmentSpec spec{4, 8, 16, 6.0, 42};
  const Environment a = generate_environment(spec, GeneratorMode::kHardGap);
  const Environment b = generate_environment(spec, GeneratorMode::kHardGap);
  CHECK(a.features.phi == b.features.phi);
  CHECK(a.truth.theta_star == b.truth.theta_star);
  CHECK(a.truth.offsets == b.truth.offsets);
  CHECK(a.rho.weights == b.rho.weights);

  const Environment c = generate_environment({4, 8, 16, 6.0, 43}, GeneratorMode::kHardGap);
  CHECK(a.features.phi != c.features.phi);
}

TEST_CASE("desk-scale hard-gap instance: range and spread by exhaustive scan") {
  const Environment env = generate_environment({4, 8, 16, 6.0, 42}, GeneratorMode::kHardGap);
  double max_spread = 0.0;
  for (std::size_t x = 0; x < 8; ++x) {
    for (std::size_t y = 0; y < 16; ++y) {
      const double r = env.reward(x, y);
      CHECK(r >= -1e-12);
      CHECK(r <= 6.0 + 1e-12);
    }
    const double s = spread(env, x);
    max_spread = std::max(max_spread, s);
    CHECK(s >= 0.9 * 6.0 - 1e-9);  // hard-gap invariant per prompt
  }
  CHECK(max_spread >= 5.4 - 1e-9);
}

TEST_CASE("uniform-random mode satisfies the range and norm invariants") {
  const Environment env = generate_environment({3, 5, 7, 2.5, 11}, GeneratorMode::kUniformRandom);
  double tn = 0.0;
  for (const double v : env.truth.theta_star) tn += v * v;
  CHECK(std::sqrt(tn) <= 2.5 + 1e-12);
  for (std::size_t x = 0; x < 5; ++x) {
    for (std::size_t y = 0; y < 7; ++y) {
      auto f = env.features.at(x, y);
      double n2 = 0.0;
      for (const double v : f) n2 += v * v;
      CHECK(std::sqrt(n2) <= 0.5 + 1e-12);
      CHECK(env.reward(x, y) >= -1e-12);
      CHECK(env.reward(x, y) <= 2.5 + 1e-12);
    }
    // Offsets shift the per-prompt minimum to exactly 0.
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < 7; ++y) lo = std::min(lo, env.reward(x, y));
    CHECK(std::abs(lo) < 1e-12);
  }
}

TEST_CASE("pairwise rewards obey the Cauchy-Schwarz bound") {
  for (const auto mode : {GeneratorMode::kUniformRandom, GeneratorMode::kHardGap}) {
    const Environment env = generate_environment({3, 4, 8, 3.0, 5}, mode);
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t yp = 0; yp < 8; ++yp)
          CHECK(std::abs(env.reward(x, y) - env.reward(x, yp)) <= 3.0 + 1e-9);
  }
}

TEST_CASE("reward accessor") {
  Environment env = testutil::env_with_rewards({0.0, 1.0, 2.0}, 4.0);
  SUBCASE("zero feature and zero offset give zero") {
    env.features.phi = {0.0, 0.1, 0.2};
    env.truth.offsets = {0.0};
    CHECK(env.reward(0, 0) == 0.0);
  }
  SUBCASE("out-of-range indices throw") {
    CHECK_THROWS_AS(env.reward(1, 0), std::out_of_range);
    CHECK_THROWS_AS(env.reward(0, 3), std::out_of_range);
  }
  SUBCASE("argmax entry equals the table maximum") {
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t y = 0; y < 3; ++y)
      if (env.reward(0, y) > best) best = env.reward(0, arg = y);
    CHECK(env.reward(0, arg) == best);
    CHECK(arg == 2);
  }
}

TEST_CASE("reward is a pure function of its inputs") {
  const Environment env = generate_environment({2, 3, 4, 2.0, 8}, GeneratorMode::kHardGap);
  const double v1 = env.reward(1, 2);
  const double v2 = env.reward(1, 2);
  CHECK(v1 == v2);
}

TEST_CASE("sample_prompt follows rho") {
  Environment env = generate_environment({2, 8, 4, 2.0, 13}, GeneratorMode::kUniformRandom);

  SUBCASE("point mass always returns its prompt") {
    env.rho.weights.assign(8, 0.0);
    env.rho.weights[3] = 1.0;
    Rng rng(1);
    for (int i = 0; i < 200; ++i) CHECK(env.sample_prompt(rng) == 3);
  }

  SUBCASE("uniform frequencies land in the binomial band") {
    Rng rng(2);
    std::vector<int> counts(8, 0);
    const int n = 80000;
    for (int i = 0; i < n; ++i) ++counts[env.sample_prompt(rng)];
    for (const int c : counts) {
      const double f = static_cast<double>(c) / n;
      CHECK(f >= 0.115);
      CHECK(f <= 0.135);
    }
  }

  SUBCASE("fixed seed gives an identical draw sequence") {
    Rng a(5), b(5);
    for (int i = 0; i < 500; ++i) CHECK(env.sample_prompt(a) == env.sample_prompt(b));
  }
}

TEST_CASE("random rho is a valid distribution") {
  const Environment env =
      generate_environment({2, 5, 4, 2.0, 21}, GeneratorMode::kUniformRandom, RhoMode::kRandom);
  env.rho.validate();
  CHECK(*std::min_element(env.rho.weights.begin(), env.rho.weights.end()) > 0.0);
}

TEST_CASE("mode and rho parsing round-trips") {
  CHECK(parse_generator_mode("hard-gap") == GeneratorMode::kHardGap);
  CHECK(parse_generator_mode(to_string(GeneratorMode::kUniformRandom)) ==
        GeneratorMode::kUniformRandom);
  CHECK_THROWS_AS(parse_generator_mode("bogus"), std::invalid_argument);
  CHECK(parse_rho_mode(to_string(RhoMode::kRandom)) == RhoMode::kRandom);
}
