#include <doctest.h>

#include <cmath>

#include "prefx/algorithms.hpp"
#include "prefx/metrics.hpp"
#include "prefx/oracle.hpp"
#include "test_util.hpp"

using namespace prefx;

namespace {

AlgorithmParams quick_params(int T, double alpha = 0.1, double beta = 0.2, int K = 1) {
  AlgorithmParams p;
  p.alpha = alpha;
  p.gamma = 8.0;
  p.beta = beta;
  p.T = T;
  p.K = K;
  p.delta = 0.05;
  return p;
}

}  // namespace

TEST_CASE("run_popo basics") {
  const Environment env = generate_environment({3, 4, 8, 2.0, 50}, GeneratorMode::kHardGap);
  const RewardClass cls = make_reward_class(env, 32);
  const TabularPolicy ref = TabularPolicy::uniform(4, 8);
  SolverConfig scfg;

  SUBCASE("T = 1 returns the reference (mixture of one)") {
    Rng rng(1);
    const auto [policy, trace] = run_popo(env, cls, ref, ref, quick_params(1), scfg, rng);
    CHECK(policy.p == ref.p);
    CHECK(trace.rows.size() == 1);
    CHECK(trace.labels_used == 1);
  }

  SUBCASE("dataset-size column counts 1..T and labels are exact") {
    Rng rng(2);
    const auto [policy, trace] = run_popo(env, cls, ref, ref, quick_params(16), scfg, rng);
    (void)policy;
    REQUIRE(trace.rows.size() == 16);
    for (int t = 0; t < 16; ++t) {
      CHECK(trace.rows[t].iter == t + 1);
      CHECK(trace.rows[t].dataset_size == static_cast<std::size_t>(t + 1));
      CHECK(trace.rows[t].labels_used == static_cast<std::size_t>(t + 1));
      CHECK(trace.rows[t].subopt_iterate >= 0.0);
      CHECK(trace.rows[t].subopt_iterate <= 2.0 + 1e-9);
      CHECK(trace.rows[t].theta.size() == 3);
    }
    CHECK(trace.labels_used == 16);
    CHECK(trace.final_subopt_mixture >= 0.0);
    CHECK(trace.c_kl > 0.0);
    CHECK(trace.c_kl_prime >= trace.c_kl - 1e-12);
  }

  SUBCASE("replay determinism: identical streams give identical traces") {
    Rng a(3), b(3);
    const auto [pa, ta] = run_popo(env, cls, ref, ref, quick_params(12), scfg, a);
    const auto [pb, tb] = run_popo(env, cls, ref, ref, quick_params(12), scfg, b);
    CHECK(pa.p == pb.p);
    REQUIRE(ta.rows.size() == tb.rows.size());
    for (std::size_t i = 0; i < ta.rows.size(); ++i) {
      CHECK(ta.rows[i].theta == tb.rows[i].theta);
      CHECK(ta.rows[i].loss_chosen == tb.rows[i].loss_chosen);
      CHECK(ta.rows[i].pref_regret == tb.rows[i].pref_regret);
      CHECK(ta.rows[i].rng_counter == tb.rows[i].rng_counter);
    }
  }

  SUBCASE("cumulative regret column is the running sum of the term") {
    Rng rng(4);
    const auto [policy, trace] = run_popo(env, cls, ref, ref, quick_params(20), scfg, rng);
    (void)policy;
    double cum = 0.0;
    for (const auto& row : trace.rows) {
      cum += row.pref_regret;
      CHECK(std::abs(row.cum_pref_regret - cum) < 1e-9);
      CHECK(row.pref_regret >= -1e-12);
      CHECK(row.pref_regret <= 1.0);
    }
  }
}

TEST_CASE("online loop agrees with stateless solves replayed by hand") {
  const Environment env = generate_environment({3, 4, 8, 2.0, 51}, GeneratorMode::kHardGap);
  const RewardClass cls = make_reward_class(env, 24);
  const TabularPolicy ref = TabularPolicy::uniform(4, 8);
  const AlgorithmParams params = quick_params(10, 0.6, 0.25);
  SolverConfig scfg;
  Rng rng_a(5);

  const auto [policy, trace] = run_popo(env, cls, ref, ref, params, scfg, rng_a);

  // Mirror the documented protocol with a fresh stream and stateless solves.
  Rng rng_b(5);
  PreferenceDataset data;
  TabularPolicy pi_t = ref;
  std::vector<TabularPolicy> iterates;
  for (int t = 1; t <= params.T; ++t) {
    const std::size_t x = env.sample_prompt(rng_b);
    const std::size_t y1 = sample_response(pi_t, x, rng_b);
    const std::size_t y2 = sample_response(ref, x, rng_b);
    data.append(label(env, x, y1, y2, rng_b));
    iterates.push_back(pi_t);
    const SolveResult res = solve_popo(cls, data, env, ref, ref, scfg, params);
    CHECK(res.reward.theta == trace.rows[static_cast<std::size_t>(t - 1)].theta);
    CHECK(res.loss ==
          doctest::Approx(trace.rows[static_cast<std::size_t>(t - 1)].loss_chosen).epsilon(1e-12));
    pi_t = res.policy;
  }
  const TabularPolicy mix = uniform_mixture(iterates);
  for (std::size_t i = 0; i < mix.p.size(); ++i)
    CHECK(mix.p[i] == doctest::Approx(policy.p[i]).epsilon(1e-12));
}

TEST_CASE("run_sepopo composes fresh POPO intervals") {
  const Environment env = generate_environment({3, 4, 8, 3.0, 52}, GeneratorMode::kHardGap);
  const RewardClass cls = make_reward_class(env, 24);
  const TabularPolicy ref = TabularPolicy::uniform(4, 8);
  SolverConfig scfg;

  SUBCASE("K = 1 is identical to run_popo on the same stream") {
    Rng a(6), b(6);
    const auto [pa, ta] = run_sepopo(env, cls, ref, quick_params(8, 0.1, 0.2, 1), scfg, a);
    const auto [pb, tb] = run_popo(env, cls, ref, ref, quick_params(8, 0.1, 0.2, 1), scfg, b);
    CHECK(pa.p == pb.p);
    REQUIRE(ta.rows.size() == tb.rows.size());
    for (std::size_t i = 0; i < ta.rows.size(); ++i)
      CHECK(ta.rows[i].theta == tb.rows[i].theta);
  }

  SUBCASE("labels total K*T, intervals are marked, datasets restart") {
    Rng rng(7);
    const auto [policy, trace] = run_sepopo(env, cls, ref, quick_params(6, 0.1, 0.2, 3), scfg, rng);
    (void)policy;
    CHECK(trace.labels_used == 18);
    REQUIRE(trace.rows.size() == 18);
    REQUIRE(trace.intervals.size() == 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(trace.intervals[static_cast<std::size_t>(k)].k == k + 1);
      for (int t = 0; t < 6; ++t) {
        const auto& row = trace.rows[static_cast<std::size_t>(k * 6 + t)];
        CHECK(row.interval == k + 1);
        CHECK(row.iter == k * 6 + t + 1);
        CHECK(row.dataset_size == static_cast<std::size_t>(t + 1));  // fresh dataset
      }
    }
    // First interval samples from pi_ref; its expected reward is recorded.
    const RewardTable truth = true_reward_table(env);
    CHECK(trace.intervals[0].sampler_expected_reward ==
          doctest::Approx(expected_reward(ref, truth, env.rho)).epsilon(1e-12));
  }

  SUBCASE("carry_data keeps the dataset growing across intervals") {
    Rng rng(8);
    RunOptions opts;
    opts.carry_data = true;
    const auto [policy, trace] =
        run_sepopo(env, cls, ref, quick_params(5, 0.1, 0.2, 2), scfg, rng, SepopoMode::kTheory,
                   opts);
    (void)policy;
    CHECK(trace.rows[5].dataset_size == 6);  // first row of interval 2
  }
}

TEST_CASE("run_dpo_iter forces alpha to zero") {
  const Environment env = generate_environment({3, 4, 8, 2.0, 53}, GeneratorMode::kHardGap);
  const RewardClass cls = make_reward_class(env, 24);
  const TabularPolicy ref = TabularPolicy::uniform(4, 8);
  SolverConfig scfg;
  Rng rng(9);

  const auto [policy, trace] = run_dpo_iter(env, cls, ref, quick_params(10, /*alpha=*/5.0), scfg,
                                            rng, SamplerMode::kSelfPlay);
  (void)policy;
  for (const auto& row : trace.rows) {
    CHECK(row.bonus_term == 0.0);
    CHECK(row.indicator);
  }
}

TEST_CASE("run_xpo with alpha 0 coincides with run_dpo_iter stream for stream") {
  const Environment env = generate_environment({3, 4, 8, 2.0, 54}, GeneratorMode::kHardGap);
  const RewardClass cls = make_reward_class(env, 24);
  const TabularPolicy ref = TabularPolicy::uniform(4, 8);
  SolverConfig scfg;

  for (const auto mode : {SamplerMode::kFixedRef, SamplerMode::kSelfPlay}) {
    Rng a(10), b(10);
    const auto [pa, ta] = run_xpo(env, cls, ref, quick_params(12, 0.0), scfg, a, mode);
    const auto [pb, tb] = run_dpo_iter(env, cls, ref, quick_params(12, 0.0), scfg, b, mode);
    CHECK(pa.p == pb.p);
    REQUIRE(ta.rows.size() == tb.rows.size());
    for (std::size_t i = 0; i < ta.rows.size(); ++i) {
      CHECK(ta.rows[i].theta == tb.rows[i].theta);
      CHECK(ta.rows[i].loss_chosen == tb.rows[i].loss_chosen);
      CHECK(ta.rows[i].bonus_term == tb.rows[i].bonus_term);
      CHECK(ta.rows[i].rng_counter == tb.rows[i].rng_counter);
    }
  }
}

TEST_CASE("checkpoints capture post-solve policies") {
  const Environment env = generate_environment({3, 4, 8, 2.0, 55}, GeneratorMode::kHardGap);
  const RewardClass cls = make_reward_class(env, 24);
  const TabularPolicy ref = TabularPolicy::uniform(4, 8);
  SolverConfig scfg;
  RunOptions opts;
  opts.checkpoint_iters = {2, 5, 9};
  Rng rng(11);
  const auto [policy, trace] =
      run_dpo_iter(env, cls, ref, quick_params(9, 0.0), scfg, rng, SamplerMode::kSelfPlay, opts);
  (void)policy;
  REQUIRE(trace.checkpoint_policies.size() == 3);
  for (const auto& chk : trace.checkpoint_policies) chk.validate();
}

TEST_CASE("summary-level traces skip per-iteration metrics but keep counters") {
  const Environment env = generate_environment({3, 4, 8, 2.0, 56}, GeneratorMode::kHardGap);
  const RewardClass cls = make_reward_class(env, 24);
  const TabularPolicy ref = TabularPolicy::uniform(4, 8);
  SolverConfig scfg;
  RunOptions opts;
  opts.full_trace = false;
  Rng rng(12);
  const auto [policy, trace] =
      run_popo(env, cls, ref, ref, quick_params(8), scfg, rng, opts);
  CHECK_FALSE(trace.full);
  CHECK(trace.rows.size() == 8);
  CHECK(trace.labels_used == 8);
  CHECK(trace.final_subopt_mixture == doctest::Approx(subopt(policy, env)).epsilon(1e-12));
}

TEST_CASE("gradient backend drives the loop when configured") {
  const Environment env = generate_environment({2, 3, 6, 2.0, 57}, GeneratorMode::kHardGap);
  const RewardClass cls = make_reward_class(env, 8);
  const TabularPolicy ref = TabularPolicy::uniform(3, 6);
  SolverConfig scfg;
  scfg.backend = SolverBackend::kGradient;
  scfg.steps = 60;
  Rng rng(13);
  const auto [policy, trace] = run_popo(env, cls, ref, ref, quick_params(4), scfg, rng);
  policy.validate();
  CHECK_FALSE(trace.analyzed_regime);
  CHECK(trace.rows.size() == 4);
}

TEST_CASE("practical SE-POPO consumes batch * T labels") {
  const Environment env = generate_environment({3, 4, 8, 2.0, 58}, GeneratorMode::kHardGap);
  const RewardClass cls = make_reward_class(env, 24);
  const TabularPolicy ref = TabularPolicy::uniform(4, 8);
  SolverConfig scfg;
  RunOptions opts;
  opts.practical_batch = 16;
  Rng rng(14);
  const auto [policy, trace] =
      run_sepopo(env, cls, ref, quick_params(5, 0.3, 0.2, 2), scfg, rng, SepopoMode::kPractical,
                 opts);
  policy.validate();
  CHECK(trace.labels_used == 5 * 16);
  CHECK(trace.rows.size() == 5);
  CHECK(trace.final_subopt_mixture >= 0.0);
}
