#include <CLI11.hpp>

#include "prefx/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic dueling-bandit exploration experiments"};

  prefx::CliOptions opts;
  std::uint64_t seed = 0;
  int seeds = 0;

  app.add_option("--config", opts.config_path, "key=value config file")->required(false);
  app.add_option("--experiment", opts.experiment,
                 "single | replicate | sweep_rmax | ablation_sampler | verify");
  app.add_option("--out", opts.out_dir, "output directory (env PREF_EXPLORER_OUT overrides)");
  auto* seed_opt = app.add_option("--seed", seed, "base run seed");
  auto* seeds_opt = app.add_option("--seeds", seeds, "number of replicate seeds");
  app.add_option("--set", opts.overrides, "KEY=VALUE config override (repeatable)");
  app.add_option("--workers", opts.workers, "worker threads (0 = hardware)");
  app.add_flag("--overwrite", opts.overwrite, "allow writing into a nonempty directory");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) opts.seed = seed;
  if (seeds_opt->count() > 0) opts.seeds = seeds;

  return prefx::run_cli(opts);
}
