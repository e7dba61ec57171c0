#include <doctest.h>

#include <cmath>

#include "prefx/metrics.hpp"
#include "prefx/oracle.hpp"
#include "test_util.hpp"

using namespace prefx;
using testutil::env_with_rewards;
using testutil::random_policy;
using testutil::sigmoid_ld;

TEST_CASE("subopt") {
  const Environment env = generate_environment({4, 8, 16, 4.0, 42}, GeneratorMode::kHardGap);
  const RewardTable truth = true_reward_table(env);

  SUBCASE("greedy policy has zero gap") {
    CHECK(subopt(greedy_policy(truth), env) == 0.0);
  }

  SUBCASE("uniform policy matches an independent exhaustive sum") {
    const TabularPolicy uni = TabularPolicy::uniform(8, 16);
    double expected = 0.0;
    for (std::size_t x = 0; x < 8; ++x) {
      double best = -1e300, mean = 0.0;
      for (std::size_t y = 0; y < 16; ++y) {
        best = std::max(best, env.reward(x, y));
        mean += env.reward(x, y) / 16.0;
      }
      expected += env.rho.weights[x] * (best - mean);
    }
    CHECK(subopt(uni, env) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("always within [0, r_max]") {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
      const double v = subopt(random_policy(8, 16, rng), env);
      CHECK(v >= 0.0);
      CHECK(v <= 4.0 + 1e-9);
    }
  }

  SUBCASE("invariant to per-prompt reward shifts") {
    const TabularPolicy pi = TabularPolicy::uniform(8, 16);
    const double before = subopt(pi, env);
    Environment shifted = env;
    for (auto& o : shifted.truth.offsets) o += 3.25;
    CHECK(subopt(pi, shifted) == doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("pref_regret_term") {
  SUBCASE("optimal policy has zero term") {
    const Environment env = generate_environment({3, 4, 8, 2.0, 7}, GeneratorMode::kHardGap);
    const TabularPolicy best = greedy_policy(true_reward_table(env));
    Rng rng(5);
    const TabularPolicy sam = random_policy(4, 8, rng);
    CHECK(std::abs(pref_regret_term(best, sam, env)) < 1e-12);
  }

  SUBCASE("two-response closed form") {
    // pi uniform, sampler = optimum, gap 1.5: 0.5 (sigma(0) - sigma(-1.5)).
    const Environment env = env_with_rewards({0.0, 1.5}, 2.0);
    const TabularPolicy best = greedy_policy(true_reward_table(env));
    const TabularPolicy uni = TabularPolicy::uniform(1, 2);
    const double v = pref_regret_term(uni, best, env);
    CHECK(std::abs(v - 0.158787) < 1e-6);
    CHECK(std::abs(v - 0.5 * (0.5 - sigmoid_ld(-1.5))) < 1e-12);
  }

  SUBCASE("nonnegative against any sampler, in [-1, 1]") {
    const Environment env = generate_environment({4, 8, 16, 6.0, 9}, GeneratorMode::kHardGap);
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
      const double v =
          pref_regret_term(random_policy(8, 16, rng), random_policy(8, 16, rng), env);
      CHECK(v >= -1e-12);  // comparator is the greedy optimum
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("winrate") {
  const Environment env = generate_environment({4, 8, 16, 6.0, 42}, GeneratorMode::kHardGap);
  Rng rng(8);

  SUBCASE("self winrate is one half") {
    for (int i = 0; i < 20; ++i) {
      const TabularPolicy pi = random_policy(8, 16, rng);
      CHECK(std::abs(winrate(pi, pi, env) - 0.5) <= 1e-12);
    }
  }
  SUBCASE("antisymmetry") {
    for (int i = 0; i < 20; ++i) {
      const TabularPolicy a = random_policy(8, 16, rng);
      const TabularPolicy b = random_policy(8, 16, rng);
      CHECK(std::abs(winrate(a, b, env) + winrate(b, a, env) - 1.0) <= 1e-12);
    }
  }
  SUBCASE("greedy beats uniform convincingly on hard gaps") {
    const TabularPolicy best = greedy_policy(true_reward_table(env));
    CHECK(winrate(best, TabularPolicy::uniform(8, 16), env) >= 0.9);
  }
  SUBCASE("invariant to per-prompt reward shifts") {
    const TabularPolicy a = random_policy(8, 16, rng);
    const TabularPolicy b = random_policy(8, 16, rng);
    const double before = winrate(a, b, env);
    Environment shifted = env;
    for (std::size_t x = 0; x < 8; ++x) shifted.truth.offsets[x] += static_cast<double>(x);
    CHECK(winrate(a, b, shifted) == doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("reward_histogram") {
  const Environment env = generate_environment({4, 8, 16, 4.0, 13}, GeneratorMode::kHardGap);

  SUBCASE("one-hot policy concentrates in a single bin") {
    TabularPolicy pi = TabularPolicy::uniform(8, 16);
    pi.p.assign(pi.p.size(), 0.0);
    for (std::size_t x = 0; x < 8; ++x) pi.at(x, 5) = 1.0;
    // All prompts share one response index but rewards differ per prompt;
    // force one prompt to isolate a single bin.
    Environment one = env;
    one.rho.weights.assign(8, 0.0);
    one.rho.weights[2] = 1.0;
    const auto hist = reward_histogram(pi, one, 10);
    int nonzero = 0;
    for (const double h : hist)
      if (h > 0.0) ++nonzero;
    CHECK(nonzero == 1);
    const auto expected_bin = std::min<std::size_t>(
        9, static_cast<std::size_t>(one.reward(2, 5) / 4.0 * 10.0));
    CHECK(hist[expected_bin] == 1.0);
  }

  SUBCASE("masses sum to one") {
    Rng rng(4);
    const auto hist = reward_histogram(random_policy(8, 16, rng), env, 20);
    double sum = 0.0;
    for (const double h : hist) sum += h;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }

  SUBCASE("uniform policy matches a brute-force recount") {
    const TabularPolicy uni = TabularPolicy::uniform(8, 16);
    const std::size_t bins = 8;
    const auto hist = reward_histogram(uni, env, bins);
    std::vector<double> expected(bins, 0.0);
    for (std::size_t x = 0; x < 8; ++x)
      for (std::size_t y = 0; y < 16; ++y) {
        auto b = static_cast<std::size_t>(env.reward(x, y) / 4.0 * bins);
        if (b >= bins) b = bins - 1;
        expected[b] += env.rho.weights[x] / 16.0;
      }
    for (std::size_t b = 0; b < bins; ++b)
      CHECK(hist[b] == doctest::Approx(expected[b]).epsilon(1e-12));
  }

  SUBCASE("bins must be positive") {
    CHECK_THROWS(reward_histogram(TabularPolicy::uniform(8, 16), env, 0));
  }
}

TEST_CASE("tv_distance") {
  const std::vector<double> a = {0.5, 0.5, 0.0};
  const std::vector<double> b = {0.0, 0.5, 0.5};
  CHECK(tv_distance(a, b) == 0.5);
  CHECK(tv_distance(a, a) == 0.0);
  const std::vector<double> c = {1.0, 0.0};
  CHECK_THROWS(tv_distance(a, c));
}
