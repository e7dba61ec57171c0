#include <doctest.h>

#include <cmath>

#include "prefx/oracle.hpp"
#include "test_util.hpp"

using namespace prefx;
using testutil::env_with_rewards;
using testutil::sigmoid_ld;

TEST_CASE("sigmoid reference values") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(std::abs(sigmoid(1.5) - 0.817574) < 1e-6);
  CHECK(std::abs(sigmoid(1.5) - sigmoid_ld(1.5)) < 1e-15);
  CHECK(std::abs(sigmoid(5.0) - 0.993307) < 1e-6);
  CHECK(sigmoid(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-14));
}

TEST_CASE("sigmoid symmetry holds to 1 ulp") {
  for (const double z : {0.1, 0.5, 2.0, 7.0, 35.0, 123.4}) {
    CHECK(std::abs(sigmoid(z) + sigmoid(-z) - 1.0) < 1e-15);
  }
}

TEST_CASE("sigmoid stable for |z| up to 700") {
  CHECK(sigmoid(700.0) == 1.0);
  CHECK(sigmoid(-700.0) > 0.0);
  CHECK(sigmoid(-700.0) < 1e-300);
  CHECK(std::isfinite(log_sigmoid(-700.0)));
  CHECK(log_sigmoid(700.0) <= 0.0);
  CHECK(log_sigmoid(700.0) > -1e-300);
}

TEST_CASE("log_sigmoid matches -log(1/sigmoid)") {
  for (const double z : {-30.0, -3.0, -0.2, 0.0, 0.7, 4.0, 20.0}) {
    CHECK(log_sigmoid(z) == doctest::Approx(std::log(sigmoid(z))).epsilon(1e-12));
  }
}

TEST_CASE("sigmoid_deriv at zero is exactly 1/4") { CHECK(sigmoid_deriv(0.0) == 0.25); }

TEST_CASE("pref_prob follows the Bradley-Terry form") {
  const Environment env = env_with_rewards({0.0, 5.0, 5.0}, 10.0);

  CHECK(pref_prob(env, 0, 1, 2) == 0.5);  // equal rewards
  CHECK(pref_prob(env, 0, 0, 0) == 0.5);  // coincident responses
  CHECK(std::abs(pref_prob(env, 0, 1, 0) - 0.993307) < 1e-6);
  CHECK(std::abs(pref_prob(env, 0, 1, 0) - sigmoid_ld(5.0)) < 1e-12);
  CHECK(std::abs(pref_prob(env, 0, 1, 0) + pref_prob(env, 0, 0, 1) - 1.0) < 1e-15);
}

TEST_CASE("pref_prob ignores per-prompt reward shifts") {
  Environment env = env_with_rewards({0.2, 1.1, 2.9}, 4.0);
  const double before = pref_prob(env, 0, 2, 1);
  env.truth.offsets[0] += 17.0;
  CHECK(pref_prob(env, 0, 2, 1) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("label picks the dominant response under a huge gap") {
  // P(loser wins) = sigma(-50) < 2e-22; 10^4 draws cannot flip it.
  const Environment env = env_with_rewards({0.0, 50.0}, 100.0);
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const PreferenceSample s = label(env, 0, 1, 0, rng);
    CHECK(s.y_w == 1);
    CHECK(s.y_l == 0);
  }
}

TEST_CASE("label is a fair coin on equal rewards") {
  const Environment env = env_with_rewards({1.0, 1.0}, 2.0);
  Rng rng(11);
  int wins_equal = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (label(env, 0, 0, 1, rng).y_w == 0) ++wins_equal;
  CHECK(static_cast<double>(wins_equal) / n > 0.494);
  CHECK(static_cast<double>(wins_equal) / n < 0.506);
}

TEST_CASE("coincident responses still cost one draw and are stored") {
  const Environment env = env_with_rewards({1.0, 1.0}, 2.0);
  Rng rng(12);
  const auto before = rng.counter();
  const PreferenceSample s = label(env, 0, 1, 1, rng);
  CHECK(s.y_w == 1);
  CHECK(s.y_l == 1);
  CHECK(rng.counter() == before + 1);
}

TEST_CASE("label frequency converges to pref_prob across random triples") {
  const EnvironmentSpec spec{3, 4, 6, 3.0, 99};
  const Environment env = generate_environment(spec, GeneratorMode::kUniformRandom);
  Rng rng(1234);
  const int n = 100000;
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = static_cast<std::size_t>(rng.next_double() * 4) % 4;
    const auto y1 = static_cast<std::size_t>(rng.next_double() * 6) % 6;
    auto y2 = static_cast<std::size_t>(rng.next_double() * 5) % 5;
    if (y2 >= y1) ++y2;  // distinct pair; coincidence has its own fair-coin case
    const double p = pref_prob(env, x, y1, y2);
    int wins = 0;
    for (int i = 0; i < n; ++i)
      if (label(env, x, y1, y2, rng).y_w == y1) ++wins;
    const double freq = static_cast<double>(wins) / n;
    CHECK(std::abs(freq - p) <= 5.0 * std::sqrt(p * (1.0 - p) / n) + 1e-12);
  }
}

TEST_CASE("label advances the stream deterministically") {
  const Environment env = env_with_rewards({0.5, 1.5}, 2.0);
  Rng a(77), b(77);
  for (int i = 0; i < 200; ++i) {
    const PreferenceSample sa = label(env, 0, 0, 1, a);
    const PreferenceSample sb = label(env, 0, 0, 1, b);
    CHECK(sa.y_w == sb.y_w);
  }
  CHECK(a.counter() == b.counter());
}
