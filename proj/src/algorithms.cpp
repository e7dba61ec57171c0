#include "prefx/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "prefx/metrics.hpp"
#include "prefx/oracle.hpp"

namespace prefx {

SamplerMode parse_sampler_mode(const std::string& s) {
  if (s == "ref" || s == "pi_ref") return SamplerMode::kFixedRef;
  if (s == "self" || s == "pi_t") return SamplerMode::kSelfPlay;
  throw std::invalid_argument("unknown sampler mode: " + s);
}

std::string to_string(SamplerMode m) { return m == SamplerMode::kFixedRef ? "ref" : "self"; }

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool uses_indicator(BonusKind kind) {
  return kind == BonusKind::kPreference || kind == BonusKind::kPreferenceLight;
}

void log_kl_constants(const Environment& env, const RewardClass& cls,
                      const TabularPolicy& pi_ref, RunTrace& trace) {
  const RewardTable truth = true_reward_table(env);
  trace.c_kl = expected_kl(greedy_policy(truth), pi_ref, env.rho);
  double worst = 0.0;
  for (const auto& m : cls.members) {
    const RewardTable t = make_reward_table(env, m.theta);
    worst = std::max(worst, expected_kl(greedy_policy(t), pi_ref, env.rho));
  }
  trace.c_kl_prime = worst;
}

struct LoopSpec {
  BonusKind kind = BonusKind::kNone;
  bool self_sampler = false;          // y2 ~ pi_t instead of the fixed sampler
  const TabularPolicy* pi_sam = nullptr;  // fixed sampler (bonus + regret comparator)
  int interval = 1;
  int iter_offset = 0;
};

// The shared online protocol: sample, label, append, re-solve. Fixed-sampler
// bonuses (G, H, J) do not depend on the dataset, so the enumerate backend
// precomputes them once and keeps per-member losses incrementally; the
// selection rule is shared with the stateless solvers bit for bit.
TabularPolicy online_loop(const Environment& env, const RewardClass& cls,
                          const TabularPolicy& pi_ref, const AlgorithmParams& params,
                          const SolverConfig& scfg, Rng& rng, const LoopSpec& spec,
                          const RunOptions& opts, PreferenceDataset& data, RunTrace& trace) {
  const auto t_start = Clock::now();
  const double alpha_eff = spec.kind == BonusKind::kNone ? 0.0 : params.alpha;
  const bool enumerate = scfg.backend == SolverBackend::kEnumerate;
  const TabularPolicy& sam = *spec.pi_sam;

  ClassEval ce;
  std::vector<double> losses;
  GradientLoopState grad_state;
  if (enumerate) {
    ce = precompute_class_eval(cls, env, pi_ref, sam, params.beta, spec.kind);
    losses.assign(cls.size(), 0.0);
    for (std::size_t i = 0; i < cls.size(); ++i) losses[i] = mle_loss(ce.tables[i], data);
  }

  TabularPolicy pi_t = pi_ref;
  TabularPolicy mixture_sum = pi_ref;  // placeholder shape; zeroed below
  mixture_sum.p.assign(mixture_sum.p.size(), 0.0);
  TabularPolicy last_solution = pi_ref;

  for (int t = 1; t <= params.T; ++t) {
    TraceRow row;
    row.iter = spec.iter_offset + t;
    row.interval = spec.interval;
    row.rng_counter = rng.counter();
    const auto t_iter = Clock::now();

    const std::size_t x = env.sample_prompt(rng);
    const std::size_t y1 = sample_response(pi_t, x, rng);
    const std::size_t y2 =
        spec.self_sampler ? sample_response(pi_t, x, rng) : sample_response(sam, x, rng);
    const PreferenceSample s = label(env, x, y1, y2, rng);
    data.append(s);
    trace.labels_used += 1;

    for (std::size_t i = 0; i < mixture_sum.p.size(); ++i) mixture_sum.p[i] += pi_t.p[i];

    TabularPolicy pi_next;
    if (enumerate) {
      for (std::size_t i = 0; i < cls.size(); ++i) losses[i] += mle_loss_term(ce.tables[i], s);
      const auto sel =
          select_enumerate(losses, ce.bonuses, alpha_eff, params.gamma, uses_indicator(spec.kind));
      pi_next = ce.policies[sel.index];
      row.loss_chosen = sel.loss;
      row.loss_min = sel.min_loss;
      row.indicator = sel.indicator;
      row.bonus_term = alpha_eff * (uses_indicator(spec.kind) ? (sel.indicator ? sel.bonus : 0.0)
                                                              : sel.bonus);
      row.theta = cls.members[sel.index].theta;
    } else {
      SolveResult res =
          solve_gradient_step(spec.kind, data, env, pi_ref, sam, scfg, params, grad_state);
      if (spec.kind == BonusKind::kNone)
        res.policy = kl_regularized_argmax(make_reward_table(env, res.reward.theta), pi_ref,
                                           params.beta);
      pi_next = res.policy;
      row.loss_chosen = res.loss;
      row.loss_min = res.min_loss;
      row.indicator = res.indicator;
      row.bonus_term = res.objective + res.loss;
      row.theta = res.reward.theta;
      trace.analyzed_regime = false;
    }

    row.dataset_size = data.size();
    row.labels_used = trace.labels_used;

    if (opts.full_trace) {
      row.subopt_iterate = subopt(pi_t, env);
      TabularPolicy mix = mixture_sum;
      const double inv = 1.0 / static_cast<double>(t);
      for (auto& v : mix.p) v *= inv;
      row.subopt_mixture = subopt(mix, env);
      const TabularPolicy& comparator = spec.self_sampler ? pi_t : sam;
      row.pref_regret = pref_regret_term(pi_t, comparator, env);
      const double prev =
          trace.rows.empty() || trace.rows.back().interval != spec.interval
              ? 0.0
              : trace.rows.back().cum_pref_regret;
      row.cum_pref_regret = prev + row.pref_regret;
    }
    row.wall_ms = elapsed_ms(t_iter);
    const int global_iter = row.iter;
    trace.rows.push_back(std::move(row));

    pi_t = std::move(pi_next);
    last_solution = pi_t;
    for (const int c : opts.checkpoint_iters)
      if (c == global_iter) trace.checkpoint_policies.push_back(pi_t);
  }

  const double inv = 1.0 / static_cast<double>(params.T);
  TabularPolicy mixture = mixture_sum;
  for (auto& v : mixture.p) v *= inv;
  for (std::size_t x = 0; x < mixture.num_prompts; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < mixture.num_responses; ++y) sum += mixture.at(x, y);
    for (std::size_t y = 0; y < mixture.num_responses; ++y) mixture.at(x, y) /= sum;
  }

  trace.final_subopt_mixture = subopt(mixture, env);
  trace.final_subopt_last_iterate = subopt(last_solution, env);
  trace.wall_ms += elapsed_ms(t_start);

  IntervalSummary summary;
  summary.k = spec.interval;
  summary.sampler_expected_reward = expected_reward(sam, true_reward_table(env), env.rho);
  summary.mixture_subopt = trace.final_subopt_mixture;
  summary.last_iterate_subopt = trace.final_subopt_last_iterate;
  summary.labels = static_cast<std::size_t>(params.T);
  trace.intervals.push_back(summary);

  return mixture;
}

std::pair<TabularPolicy, RunTrace> run_sepopo_practical(const Environment& env,
                                                        const RewardClass& cls,
                                                        const TabularPolicy& pi_ref,
                                                        const AlgorithmParams& params,
                                                        const SolverConfig& scfg, Rng& rng,
                                                        const RunOptions& opts) {
  if (scfg.backend != SolverBackend::kEnumerate)
    throw std::invalid_argument("practical SE-POPO supports the enumerate backend only");
  const auto t_start = Clock::now();
  RunTrace trace;
  trace.full = false;
  log_kl_constants(env, cls, pi_ref, trace);

  TabularPolicy ref = pi_ref;
  for (int t = 1; t <= params.T; ++t) {
    TraceRow row;
    row.iter = t;
    row.rng_counter = rng.counter();

    PreferenceDataset batch;
    for (std::size_t b = 0; b < opts.practical_batch; ++b) {
      const std::size_t x = env.sample_prompt(rng);
      const std::size_t y1 = sample_response(ref, x, rng);
      const std::size_t y2 = sample_response(ref, x, rng);
      batch.append(label(env, x, y1, y2, rng));
      trace.labels_used += 1;
    }

    // Fresh H bonus against the current reference; no truncation term.
    const ClassEval ce =
        precompute_class_eval(cls, env, ref, ref, params.beta, BonusKind::kPreferenceLight);
    std::vector<double> losses(cls.size(), 0.0);
    for (std::size_t i = 0; i < cls.size(); ++i) losses[i] = mle_loss(ce.tables[i], batch);
    const auto sel = select_enumerate(losses, ce.bonuses, params.alpha, params.gamma, false);

    ref = ce.policies[sel.index];
    row.loss_chosen = sel.loss;
    row.loss_min = sel.min_loss;
    row.bonus_term = params.alpha * sel.bonus;
    row.theta = cls.members[sel.index].theta;
    row.dataset_size = trace.labels_used;
    row.labels_used = trace.labels_used;
    trace.rows.push_back(std::move(row));
  }

  trace.final_subopt_mixture = subopt(ref, env);
  trace.final_subopt_last_iterate = trace.final_subopt_mixture;
  trace.wall_ms = elapsed_ms(t_start);
  return {ref, trace};
}

}  // namespace

std::pair<TabularPolicy, RunTrace> run_popo(const Environment& env, const RewardClass& cls,
                                            const TabularPolicy& pi_ref,
                                            const TabularPolicy& pi_sam,
                                            const AlgorithmParams& params,
                                            const SolverConfig& scfg, Rng& rng,
                                            const RunOptions& opts) {
  params.validate();
  scfg.validate();
  RunTrace trace;
  trace.full = opts.full_trace;
  log_kl_constants(env, cls, pi_ref, trace);

  PreferenceDataset data;
  LoopSpec spec;
  spec.kind = opts.popo_bonus;
  spec.pi_sam = &pi_sam;
  TabularPolicy out = online_loop(env, cls, pi_ref, params, scfg, rng, spec, opts, data, trace);
  return {std::move(out), std::move(trace)};
}

std::pair<TabularPolicy, RunTrace> run_sepopo(const Environment& env, const RewardClass& cls,
                                              const TabularPolicy& pi_ref,
                                              const AlgorithmParams& params,
                                              const SolverConfig& scfg, Rng& rng,
                                              SepopoMode mode, const RunOptions& opts) {
  params.validate();
  scfg.validate();
  if (mode == SepopoMode::kPractical)
    return run_sepopo_practical(env, cls, pi_ref, params, scfg, rng, opts);

  RunTrace trace;
  trace.full = opts.full_trace;
  log_kl_constants(env, cls, pi_ref, trace);

  PreferenceDataset data;
  TabularPolicy sampler = pi_ref;
  TabularPolicy out;
  for (int k = 1; k <= params.K; ++k) {
    if (!opts.carry_data) data = PreferenceDataset{};
    LoopSpec spec;
    spec.kind = opts.popo_bonus;
    spec.pi_sam = &sampler;
    spec.interval = k;
    spec.iter_offset = (k - 1) * params.T;
    out = online_loop(env, cls, pi_ref, params, scfg, rng, spec, opts, data, trace);
    if (k < params.K) sampler = out;
  }
  return {std::move(out), std::move(trace)};
}

std::pair<TabularPolicy, RunTrace> run_dpo_iter(const Environment& env, const RewardClass& cls,
                                                const TabularPolicy& pi_ref,
                                                const AlgorithmParams& params,
                                                const SolverConfig& scfg, Rng& rng,
                                                SamplerMode sampler_mode, const RunOptions& opts) {
  params.validate();
  scfg.validate();
  RunTrace trace;
  trace.full = opts.full_trace;
  log_kl_constants(env, cls, pi_ref, trace);

  PreferenceDataset data;
  LoopSpec spec;
  spec.kind = BonusKind::kNone;  // alpha forced to 0 regardless of config
  spec.self_sampler = sampler_mode == SamplerMode::kSelfPlay;
  spec.pi_sam = &pi_ref;
  TabularPolicy out = online_loop(env, cls, pi_ref, params, scfg, rng, spec, opts, data, trace);
  return {std::move(out), std::move(trace)};
}

std::pair<TabularPolicy, RunTrace> run_xpo(const Environment& env, const RewardClass& cls,
                                           const TabularPolicy& pi_ref,
                                           const AlgorithmParams& params,
                                           const SolverConfig& scfg, Rng& rng,
                                           SamplerMode sampler_mode, const RunOptions& opts) {
  params.validate();
  scfg.validate();
  RunTrace trace;
  trace.full = opts.full_trace;
  log_kl_constants(env, cls, pi_ref, trace);

  PreferenceDataset data;
  LoopSpec spec;
  spec.kind = BonusKind::kValue;
  spec.self_sampler = sampler_mode == SamplerMode::kSelfPlay;
  spec.pi_sam = &pi_ref;
  TabularPolicy out = online_loop(env, cls, pi_ref, params, scfg, rng, spec, opts, data, trace);
  return {std::move(out), std::move(trace)};
}

}  // namespace prefx
