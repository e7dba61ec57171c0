#include "prefx/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "prefx/metrics.hpp"
#include "prefx/serialize.hpp"
#include "prefx/verify.hpp"

#ifndef PREFX_GIT_DESCRIBE
#define PREFX_GIT_DESCRIBE "unknown"
#endif

namespace prefx {

namespace {

namespace fs = std::filesystem;

int effective_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Fan out independent tasks; results must go to per-index slots. Output
// never depends on scheduling.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const int w = std::min<int>(effective_workers(workers), static_cast<int>(n));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t stream_id(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  return ((a * 1000003ull + b) * 1000003ull + c) * 1000003ull + d;
}

nlohmann::json config_echo(const KeyValueConfig& cfg, const std::string& experiment) {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["git"] = PREFX_GIT_DESCRIBE;
  nlohmann::json kv;
  for (const auto& [k, v] : cfg.entries()) kv[k] = v;
  j["config"] = std::move(kv);
  return j;
}

nlohmann::json params_json(const AlgorithmParams& p, const SolverConfig& scfg,
                           std::size_t class_size) {
  return {{"alpha", p.alpha},   {"gamma", p.gamma}, {"beta", p.beta},
          {"T", p.T},           {"K", p.K},         {"delta", p.delta},
          {"backend", to_string(scfg.backend)},     {"class_size", class_size}};
}

nlohmann::json trace_summary_json(const RunTrace& trace) {
  nlohmann::json j;
  j["labels_used"] = trace.labels_used;
  j["final_subopt_mixture"] = trace.final_subopt_mixture;
  j["final_subopt_last_iterate"] = trace.final_subopt_last_iterate;
  j["c_kl"] = trace.c_kl;
  j["c_kl_prime"] = trace.c_kl_prime;
  j["analyzed_regime"] = trace.analyzed_regime;
  nlohmann::json intervals = nlohmann::json::array();
  for (const auto& iv : trace.intervals) {
    intervals.push_back({{"k", iv.k},
                         {"sampler_expected_reward", iv.sampler_expected_reward},
                         {"mixture_subopt", iv.mixture_subopt},
                         {"last_iterate_subopt", iv.last_iterate_subopt},
                         {"labels", iv.labels}});
  }
  j["intervals"] = std::move(intervals);
  return j;
}

struct ResolvedRun {
  Environment env;
  RewardClass cls;
  SolverConfig scfg;
  AlgorithmConfig acfg;
  TabularPolicy pi_ref;
};

TabularPolicy reference_from_config(const KeyValueConfig& cfg, const Environment& env) {
  const std::string kind = cfg.get_str("ref.policy", "uniform");
  if (kind == "uniform") return TabularPolicy::uniform(env.num_prompts(), env.num_responses());
  if (kind == "skewed") return skewed_reference(env, cfg.get_double("ref.tau", 2.0));
  throw ConfigError("ref.policy must be uniform or skewed, got: " + kind);
}

ResolvedRun resolve_run(const KeyValueConfig& cfg) {
  ResolvedRun r;
  r.env = env_from_config(cfg);
  r.cls = class_from_config(cfg, r.env);
  r.scfg = solver_from_config(cfg);
  r.acfg = algorithm_from_config(cfg);
  r.pi_ref = reference_from_config(cfg, r.env);
  return r;
}

RunOptions options_from_config(const KeyValueConfig& cfg) {
  RunOptions opts;
  opts.full_trace = cfg.get_bool("run.full_trace", true);
  opts.carry_data = cfg.get_bool("alg.carry_data", false);
  const std::string bonus = cfg.get_str("alg.bonus", "g");
  if (bonus == "g") {
    opts.popo_bonus = BonusKind::kPreference;
  } else if (bonus == "h") {
    opts.popo_bonus = BonusKind::kPreferenceLight;
  } else {
    throw ConfigError("config key alg.bonus must be g or h, got: " + bonus);
  }
  opts.practical_batch = static_cast<std::size_t>(cfg.get_int("alg.practical_batch", 64));
  return opts;
}

// ---- experiments ----

ExperimentResult experiment_single(const KeyValueConfig& cfg, int /*workers*/) {
  ResolvedRun rr = resolve_run(cfg);
  const std::string algo = cfg.get_str("alg.name", "popo");
  const AlgorithmParams params = rr.acfg.resolve(rr.env, rr.cls.size());
  const RunOptions opts = options_from_config(cfg);
  const std::uint64_t base_seed = cfg.get_u64("run.seed", 1);

  Rng rng = Rng(base_seed).split(0);
  auto [policy, trace] = run_algorithm(algo, rr.env, rr.cls, rr.pi_ref, params, rr.scfg, rng, opts);

  nlohmann::json summary = config_echo(cfg, "single");
  summary["algorithm"] = algo;
  summary["resolved"] = params_json(params, rr.scfg, rr.cls.size());
  summary["seeds"] = {base_seed};
  summary["run"] = trace_summary_json(trace);

  ExperimentResult result;
  result.artifacts.add("config.json", json_to_string(config_echo(cfg, "single")));
  result.artifacts.add("environment.json", json_to_string(env_to_json(rr.env)));
  result.artifacts.add("trace.csv", trace_to_csv(trace, rr.env.dim()));
  result.artifacts.add("policy.json", json_to_string(policy_to_json(policy)));
  result.artifacts.add("summary.json", json_to_string(summary));
  return result;
}

ExperimentResult experiment_replicate(const KeyValueConfig& cfg, int workers) {
  ResolvedRun rr = resolve_run(cfg);
  const std::string algo = cfg.get_str("alg.name", "popo");
  const AlgorithmParams params = rr.acfg.resolve(rr.env, rr.cls.size());
  const RunOptions opts = options_from_config(cfg);
  const std::uint64_t base_seed = cfg.get_u64("run.seed", 1);
  const int seeds = static_cast<int>(cfg.get_int("run.seeds", 20));
  if (seeds < 1) throw ConfigError("run.seeds must be >= 1");

  std::vector<RunTrace> traces(static_cast<std::size_t>(seeds));
  parallel_for(static_cast<std::size_t>(seeds), workers, [&](std::size_t i) {
    Rng rng = Rng(base_seed).split(i);
    auto [policy, trace] =
        run_algorithm(algo, rr.env, rr.cls, rr.pi_ref, params, rr.scfg, rng, opts);
    (void)policy;
    traces[i] = std::move(trace);
  });

  double mean_mix = 0.0, mean_last = 0.0;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& t : traces) {
    mean_mix += t.final_subopt_mixture;
    mean_last += t.final_subopt_last_iterate;
    runs.push_back(trace_summary_json(t));
  }
  mean_mix /= seeds;
  mean_last /= seeds;

  nlohmann::json summary = config_echo(cfg, "replicate");
  summary["algorithm"] = algo;
  summary["resolved"] = params_json(params, rr.scfg, rr.cls.size());
  summary["seeds"] = seeds;
  summary["base_seed"] = base_seed;
  summary["mean_final_subopt_mixture"] = mean_mix;
  summary["mean_final_subopt_last_iterate"] = mean_last;
  summary["runs"] = std::move(runs);

  ExperimentResult result;
  result.artifacts.add("config.json", json_to_string(config_echo(cfg, "replicate")));
  result.artifacts.add("environment.json", json_to_string(env_to_json(rr.env)));
  for (int i = 0; i < seeds; ++i)
    result.artifacts.add("trace_seed" + std::to_string(i) + ".csv",
                         trace_to_csv(traces[static_cast<std::size_t>(i)], rr.env.dim()));
  result.artifacts.add("summary.json", json_to_string(summary));
  return result;
}

ExperimentResult experiment_sweep_rmax(const KeyValueConfig& cfg, int workers) {
  const auto r_max_list = cfg.get_double_list("sweep.r_max_list", {2.0, 6.0, 10.0});
  const auto algos = cfg.get_str_list("sweep.algorithms", {"sepopo", "popo"});
  const int seeds = static_cast<int>(cfg.get_int("run.seeds", 10));
  const double epsilon = cfg.get_double("sweep.epsilon", 0.1);
  const std::size_t budget_min = static_cast<std::size_t>(cfg.get_int("sweep.budget_min", 64));
  const std::size_t budget_max = static_cast<std::size_t>(cfg.get_int("sweep.budget_max", 65536));
  const std::uint64_t base_seed = cfg.get_u64("run.seed", 1);
  if (r_max_list.size() < 2) throw ConfigError("sweep.r_max_list needs at least 2 points");
  if (seeds < 5) throw ConfigError("run.seeds must be >= 5 for sweep_rmax");
  if (budget_min < 1 || budget_max < budget_min)
    throw ConfigError("invalid sweep budget grid");

  const SolverConfig scfg = solver_from_config(cfg);
  const RunOptions base_opts = [&] {
    RunOptions o = options_from_config(cfg);
    o.full_trace = false;
    return o;
  }();

  // Which returned policy the labels-to-epsilon threshold is measured on:
  // the deployed last iterate (default) or the analyzed uniform mixture.
  const std::string metric = cfg.get_str("sweep.metric", "last");
  if (metric != "last" && metric != "mixture")
    throw ConfigError("sweep.metric must be last or mixture, got: " + metric);
  const bool use_last = metric == "last";

  std::ostringstream probes;
  probes << "algorithm,r_max,budget,labels,mean_subopt_mixture,mean_subopt_last\n";
  std::ostringstream table;
  table << "algorithm,r_max,labels_to_eps,status,mean_subopt\n";
  nlohmann::json cells = nlohmann::json::array();

  for (std::size_t ri = 0; ri < r_max_list.size(); ++ri) {
    KeyValueConfig env_cfg = cfg;
    env_cfg.set("env.r_max", format_double(r_max_list[ri]));
    const Environment env = env_from_config(env_cfg);
    const RewardClass cls = class_from_config(cfg, env);
    const TabularPolicy pi_ref = reference_from_config(cfg, env);

    for (std::size_t ai = 0; ai < algos.size(); ++ai) {
      const std::string& algo = algos[ai];
      double labels_to_eps = -1.0;
      double subopt_at_eps = -1.0;
      std::size_t budget_idx = 0;
      for (std::size_t budget = budget_min; budget <= budget_max; budget *= 2, ++budget_idx) {
        AlgorithmConfig acfg = algorithm_from_config(cfg);
        const int k_intervals =
            algo.rfind("sepopo", 0) == 0
                ? acfg.K.value_or(static_cast<int>(std::ceil(env.spec.r_max)))
                : 1;
        acfg.T = static_cast<int>(std::max<std::size_t>(
            1, budget / static_cast<std::size_t>(std::max(1, k_intervals))));

        const AlgorithmParams params = acfg.resolve(env, cls.size());
        std::vector<double> mix_subopts(static_cast<std::size_t>(seeds), 0.0);
        std::vector<double> last_subopts(static_cast<std::size_t>(seeds), 0.0);
        std::vector<std::size_t> labels(static_cast<std::size_t>(seeds), 0);
        parallel_for(static_cast<std::size_t>(seeds), workers, [&](std::size_t s) {
          Rng rng = Rng(base_seed).split(stream_id(ri, ai, budget_idx, s));
          auto [policy, trace] =
              run_algorithm(algo, env, cls, pi_ref, params, scfg, rng, base_opts);
          (void)policy;
          mix_subopts[s] = trace.final_subopt_mixture;
          last_subopts[s] = trace.final_subopt_last_iterate;
          labels[s] = trace.labels_used;
        });

        double mean_mix = 0.0, mean_last = 0.0;
        for (std::size_t s = 0; s < mix_subopts.size(); ++s) {
          mean_mix += mix_subopts[s];
          mean_last += last_subopts[s];
        }
        mean_mix /= seeds;
        mean_last /= seeds;
        probes << algo << ',' << format_double(env.spec.r_max) << ',' << budget << ','
               << labels[0] << ',' << format_double(mean_mix) << ','
               << format_double(mean_last) << "\n";

        const double mean = use_last ? mean_last : mean_mix;
        if (mean <= epsilon * env.spec.r_max) {
          labels_to_eps = static_cast<double>(labels[0]);
          subopt_at_eps = mean;
          break;
        }
      }

      const bool found = labels_to_eps >= 0.0;
      table << algo << ',' << format_double(env.spec.r_max) << ','
            << (found ? format_double(labels_to_eps) : "") << ','
            << (found ? "ok" : "budget-exceeded") << ','
            << (found ? format_double(subopt_at_eps) : "") << "\n";
      cells.push_back({{"algorithm", algo},
                       {"r_max", env.spec.r_max},
                       {"labels_to_eps", labels_to_eps},
                       {"found", found}});
    }
  }

  // Scaling ratios between the extreme r_max points, per algorithm.
  const double r_lo = *std::min_element(r_max_list.begin(), r_max_list.end());
  const double r_hi = *std::max_element(r_max_list.begin(), r_max_list.end());
  nlohmann::json ratios;
  for (const auto& algo : algos) {
    double lo = -1.0, hi = -1.0;
    for (const auto& c : cells) {
      if (c.at("algorithm") != algo) continue;
      const double r = c.at("r_max").get<double>();
      const double v = c.at("labels_to_eps").get<double>();
      if (r == r_lo) lo = v;
      if (r == r_hi) hi = v;
    }
    nlohmann::json entry;
    entry["labels_lo"] = lo;
    entry["labels_hi"] = hi;
    entry["found_both"] = lo > 0.0 && hi > 0.0;
    entry["ratio_hi_over_lo"] = (lo > 0.0 && hi > 0.0) ? hi / lo : -1.0;
    ratios[algo] = std::move(entry);
  }

  nlohmann::json summary = config_echo(cfg, "sweep_rmax");
  summary["epsilon"] = epsilon;
  summary["metric"] = metric;
  summary["seeds"] = seeds;
  summary["base_seed"] = base_seed;
  summary["r_lo"] = r_lo;
  summary["r_hi"] = r_hi;
  summary["cells"] = std::move(cells);
  summary["ratios"] = std::move(ratios);

  ExperimentResult result;
  result.artifacts.add("config.json", json_to_string(config_echo(cfg, "sweep_rmax")));
  result.artifacts.add("scaling_probes.csv", probes.str());
  result.artifacts.add("scaling_table.csv", table.str());
  result.artifacts.add("summary.json", json_to_string(summary));
  return result;
}

ExperimentResult experiment_ablation(const KeyValueConfig& cfg, int workers) {
  ResolvedRun rr = resolve_run(cfg);
  const int seeds = static_cast<int>(cfg.get_int("run.seeds", 20));
  if (seeds < 5) throw ConfigError("run.seeds must be >= 5 for ablation_sampler");
  const std::uint64_t base_seed = cfg.get_u64("run.seed", 1);
  const std::size_t bins = static_cast<std::size_t>(cfg.get_int("ablation.bins", 20));

  AlgorithmConfig acfg = algorithm_from_config(cfg);
  // Sharp KL-argmax policies degenerate self-play comparisons at desk
  // scale; the ablation default keeps the policy soft unless overridden.
  if (!acfg.beta) acfg.beta = cfg.get_double("ablation.beta", 1.0);
  const AlgorithmParams params = acfg.resolve(rr.env, rr.cls.size());

  // Three checkpoint "iterations", mirroring the 3-iteration online setup.
  const std::vector<int> checkpoints = {params.T / 3, 2 * params.T / 3, params.T};
  if (checkpoints[0] < 1) throw ConfigError("ablation needs alg.T >= 3");

  RunOptions opts = options_from_config(cfg);
  opts.full_trace = false;
  opts.checkpoint_iters = checkpoints;

  const std::vector<SamplerMode> modes = {SamplerMode::kSelfPlay, SamplerMode::kFixedRef};

  struct SeedOutcome {
    std::vector<double> winrates, avg_rewards, subopts;
    std::vector<std::vector<double>> hists;
    double tv12 = 0.0, tv23 = 0.0;
  };
  std::vector<std::vector<SeedOutcome>> outcomes(
      modes.size(), std::vector<SeedOutcome>(static_cast<std::size_t>(seeds)));

  const RewardTable truth = true_reward_table(rr.env);
  for (std::size_t mi = 0; mi < modes.size(); ++mi) {
    parallel_for(static_cast<std::size_t>(seeds), workers, [&](std::size_t s) {
      Rng rng = Rng(base_seed).split(stream_id(7, mi, 0, s));
      auto [policy, trace] =
          run_dpo_iter(rr.env, rr.cls, rr.pi_ref, params, rr.scfg, rng, modes[mi], opts);
      (void)policy;
      SeedOutcome& out = outcomes[mi][s];
      for (const auto& chk : trace.checkpoint_policies) {
        out.winrates.push_back(winrate(chk, rr.pi_ref, rr.env));
        out.avg_rewards.push_back(expected_reward(chk, truth, rr.env.rho));
        out.subopts.push_back(subopt(chk, rr.env));
        out.hists.push_back(reward_histogram(chk, rr.env, bins));
      }
      if (out.hists.size() >= 3) {
        out.tv12 = tv_distance(out.hists[0], out.hists[1]);
        out.tv23 = tv_distance(out.hists[1], out.hists[2]);
      }
    });
  }

  std::ostringstream csv;
  csv << "mode,seed,iteration,winrate_vs_ref,avg_reward,subopt\n";
  std::ostringstream hist_csv;
  hist_csv << "mode,seed,iteration,bin,mass\n";
  nlohmann::json mode_summaries;
  for (std::size_t mi = 0; mi < modes.size(); ++mi) {
    const std::string mode_name = to_string(modes[mi]);
    double mean_final = 0.0, mean_tv12 = 0.0, mean_tv23 = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const SeedOutcome& out = outcomes[mi][static_cast<std::size_t>(s)];
      for (std::size_t k = 0; k < out.winrates.size(); ++k) {
        csv << mode_name << ',' << s << ',' << (k + 1) << ','
            << format_double(out.winrates[k]) << ',' << format_double(out.avg_rewards[k]) << ','
            << format_double(out.subopts[k]) << "\n";
        for (std::size_t b = 0; b < out.hists[k].size(); ++b)
          hist_csv << mode_name << ',' << s << ',' << (k + 1) << ',' << b << ','
                   << format_double(out.hists[k][b]) << "\n";
      }
      mean_final += out.subopts.empty() ? 0.0 : out.subopts.back();
      mean_tv12 += out.tv12;
      mean_tv23 += out.tv23;
    }
    mode_summaries[mode_name] = {{"mean_final_subopt", mean_final / seeds},
                                 {"mean_tv12", mean_tv12 / seeds},
                                 {"mean_tv23", mean_tv23 / seeds}};
  }

  nlohmann::json summary = config_echo(cfg, "ablation_sampler");
  summary["seeds"] = seeds;
  summary["base_seed"] = base_seed;
  summary["resolved"] = params_json(params, rr.scfg, rr.cls.size());
  summary["checkpoints"] = checkpoints;
  summary["modes"] = std::move(mode_summaries);

  ExperimentResult result;
  result.artifacts.add("config.json", json_to_string(config_echo(cfg, "ablation_sampler")));
  result.artifacts.add("environment.json", json_to_string(env_to_json(rr.env)));
  result.artifacts.add("ablation.csv", csv.str());
  result.artifacts.add("histograms.csv", hist_csv.str());
  result.artifacts.add("summary.json", json_to_string(summary));
  return result;
}

ExperimentResult experiment_verify(const KeyValueConfig& cfg, int /*workers*/) {
  const Environment env = env_from_config(cfg);
  const RewardClass cls = class_from_config(cfg, env);

  VerifySettings settings;
  settings.r_max_list = cfg.get_double_list("verify.r_max_list", settings.r_max_list);
  settings.grid_step = cfg.get_double("verify.grid_step", 0.0);
  settings.beta_list = cfg.get_double_list("verify.beta_list", settings.beta_list);
  settings.gh_trials = static_cast<int>(cfg.get_int("verify.gh_trials", settings.gh_trials));
  settings.dpo_trials = static_cast<int>(cfg.get_int("verify.dpo_trials", settings.dpo_trials));
  settings.mle_trials = static_cast<int>(cfg.get_int("verify.mle_trials", settings.mle_trials));
  settings.delta = cfg.get_double("verify.delta", settings.delta);
  settings.seed = cfg.get_u64("verify.seed", settings.seed);
  {
    const auto grid = cfg.get_double_list("verify.mle_n_grid", {250, 1000, 4000});
    settings.mle_n_grid.clear();
    for (double v : grid) settings.mle_n_grid.push_back(static_cast<std::size_t>(v));
  }

  const auto reports = run_verify_suite(env, cls, settings);

  bool all_pass = true;
  bool deterministic_pass = true;
  nlohmann::json items = nlohmann::json::array();
  for (const auto& rep : reports) {
    all_pass = all_pass && rep.pass;
    if (rep.deterministic && !rep.pass) deterministic_pass = false;
    items.push_back(report_to_json(rep));
  }

  nlohmann::json report = config_echo(cfg, "verify");
  report["all_pass"] = all_pass;
  report["deterministic_pass"] = deterministic_pass;
  report["reports"] = std::move(items);

  ExperimentResult result;
  result.artifacts.add("config.json", json_to_string(config_echo(cfg, "verify")));
  result.artifacts.add("verify_report.json", json_to_string(report));
  result.verify_failed = !all_pass;
  return result;
}

}  // namespace

Environment env_from_config(const KeyValueConfig& cfg) {
  EnvironmentSpec spec;
  spec.dim = static_cast<std::size_t>(cfg.require_int("env.d"));
  spec.num_prompts = static_cast<std::size_t>(cfg.require_int("env.num_prompts"));
  spec.num_responses = static_cast<std::size_t>(cfg.require_int("env.num_responses"));
  spec.r_max = cfg.require_double("env.r_max");
  spec.seed = cfg.get_u64("env.seed", 1);
  const GeneratorMode mode = parse_generator_mode(cfg.get_str("env.mode", "hard-gap"));
  const RhoMode rho = parse_rho_mode(cfg.get_str("env.rho", "uniform"));
  try {
    return generate_environment(spec, mode, rho);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid environment spec: ") + e.what());
  }
}

RewardClass class_from_config(const KeyValueConfig& cfg, const Environment& env) {
  const auto size = static_cast<std::size_t>(cfg.get_int("class.size", 256));
  return make_reward_class(env, size);
}

SolverConfig solver_from_config(const KeyValueConfig& cfg) {
  SolverConfig scfg;
  scfg.backend = parse_solver_backend(cfg.get_str("solver.backend", "enumerate"));
  scfg.steps = static_cast<int>(cfg.get_int("solver.steps", scfg.steps));
  scfg.warm_steps = static_cast<int>(cfg.get_int("solver.warm_steps", scfg.warm_steps));
  scfg.step_size = cfg.get_double("solver.step_size", scfg.step_size);
  scfg.tolerance = cfg.get_double("solver.tolerance", scfg.tolerance);
  scfg.projection_radius = cfg.get_double("solver.projection_radius", 0.0);
  scfg.validate();
  return scfg;
}

AlgorithmConfig algorithm_from_config(const KeyValueConfig& cfg) {
  AlgorithmConfig acfg;
  acfg.alpha = cfg.get_auto_double("alg.alpha");
  acfg.gamma = cfg.get_auto_double("alg.gamma");
  acfg.beta = cfg.get_auto_double("alg.beta");
  acfg.T = static_cast<int>(cfg.get_int("alg.T", 512));
  if (const auto k = cfg.get_auto_int("alg.K")) acfg.K = static_cast<int>(*k);
  acfg.delta = cfg.get_double("alg.delta", 0.05);
  return acfg;
}

std::pair<TabularPolicy, RunTrace> run_algorithm(const std::string& name, const Environment& env,
                                                 const RewardClass& cls,
                                                 const TabularPolicy& pi_ref,
                                                 const AlgorithmParams& params,
                                                 const SolverConfig& scfg, Rng& rng,
                                                 const RunOptions& opts) {
  if (name == "popo") return run_popo(env, cls, pi_ref, pi_ref, params, scfg, rng, opts);
  if (name == "popo-light") {
    RunOptions o = opts;
    o.popo_bonus = BonusKind::kPreferenceLight;
    return run_popo(env, cls, pi_ref, pi_ref, params, scfg, rng, o);
  }
  if (name == "sepopo")
    return run_sepopo(env, cls, pi_ref, params, scfg, rng, SepopoMode::kTheory, opts);
  if (name == "sepopo-practical")
    return run_sepopo(env, cls, pi_ref, params, scfg, rng, SepopoMode::kPractical, opts);
  if (name == "dpo-ref")
    return run_dpo_iter(env, cls, pi_ref, params, scfg, rng, SamplerMode::kFixedRef, opts);
  if (name == "dpo-self")
    return run_dpo_iter(env, cls, pi_ref, params, scfg, rng, SamplerMode::kSelfPlay, opts);
  if (name == "xpo-ref")
    return run_xpo(env, cls, pi_ref, params, scfg, rng, SamplerMode::kFixedRef, opts);
  if (name == "xpo-self")
    return run_xpo(env, cls, pi_ref, params, scfg, rng, SamplerMode::kSelfPlay, opts);
  throw ConfigError("unknown algorithm: " + name);
}

ExperimentResult run_experiment(const KeyValueConfig& cfg, const std::string& experiment,
                                int workers) {
  if (experiment == "single") return experiment_single(cfg, workers);
  if (experiment == "replicate") return experiment_replicate(cfg, workers);
  if (experiment == "sweep_rmax") return experiment_sweep_rmax(cfg, workers);
  if (experiment == "ablation_sampler") return experiment_ablation(cfg, workers);
  if (experiment == "verify") return experiment_verify(cfg, workers);
  throw ConfigError("unknown experiment: " + experiment);
}

void write_artifacts(const std::string& out_dir, const Artifacts& artifacts, bool overwrite) {
  const fs::path root(out_dir);
  if (fs::exists(root) && fs::is_directory(root) && !fs::is_empty(root) && !overwrite)
    throw ConfigError("output directory not empty (use --overwrite): " + out_dir);
  fs::create_directories(root);
  for (const auto& [relpath, bytes] : artifacts.files) {
    const fs::path target = root / relpath;
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write artifact: " + target.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
}

int run_cli(const CliOptions& opts) {
  try {
    if (opts.config_path.empty()) throw ConfigError("missing --config PATH");
    KeyValueConfig cfg = KeyValueConfig::from_file(opts.config_path);
    for (const auto& ov : opts.overrides) cfg.apply_override(ov);
    if (opts.seed) cfg.set("run.seed", std::to_string(*opts.seed));
    if (opts.seeds) cfg.set("run.seeds", std::to_string(*opts.seeds));

    std::string experiment = opts.experiment;
    if (experiment.empty()) experiment = cfg.require_str("experiment");

    std::string out_dir = opts.out_dir;
    if (const char* env_out = std::getenv("PREF_EXPLORER_OUT"); env_out && *env_out)
      out_dir = env_out;

    const ExperimentResult result = run_experiment(cfg, experiment, opts.workers);
    write_artifacts(out_dir, result.artifacts, opts.overwrite);
    std::cerr << "wrote " << result.artifacts.files.size() << " artifact(s) to " << out_dir
              << "\n";
    return result.verify_failed ? 3 : 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace prefx
