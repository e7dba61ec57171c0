#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prefx/rng.hpp"

namespace prefx {

// A finite contextual dueling-bandit instance: |X| prompts, |Y| responses
// per prompt, linear ground-truth reward bounded in [0, r_max].
struct EnvironmentSpec {
  std::size_t dim = 4;
  std::size_t num_prompts = 8;
  std::size_t num_responses = 16;
  double r_max = 2.0;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument on d < 1, |X| < 1, |Y| < 2 or r_max < 1.
  void validate() const;
};

enum class GeneratorMode {
  kUniformRandom,  // features and theta* drawn uniformly from their balls
  kHardGap,        // plants a >= 0.9 * r_max reward spread in every prompt
};

enum class RhoMode {
  kUniform,
  kRandom,  // normalized iid uniforms
};

GeneratorMode parse_generator_mode(const std::string& s);
RhoMode parse_rho_mode(const std::string& s);
std::string to_string(GeneratorMode m);
std::string to_string(RhoMode m);

struct PromptDistribution {
  std::vector<double> weights;

  void validate() const;  // nonnegative, sums to 1 within 1e-12
};

// phi(x, y) in R^d, stored row-major as (x * |Y| + y) * d + j.
// Generation keeps ||phi(x,y)||_2 <= 1/2 so every pairwise difference
// phi(x,y) - phi(x,y') has norm at most 1.
struct FeatureTable {
  std::size_t num_prompts = 0;
  std::size_t num_responses = 0;
  std::size_t dim = 0;
  std::vector<double> phi;

  std::span<const double> at(std::size_t x, std::size_t y) const {
    return {phi.data() + (x * num_responses + y) * dim, dim};
  }
};

// theta* with ||theta*||_2 <= r_max plus a per-prompt shift that moves the
// minimum reward of each prompt to exactly 0. The shifts cancel in every
// pairwise quantity, so they never affect learning.
struct TrueReward {
  std::vector<double> theta_star;
  std::vector<double> offsets;  // one per prompt
};

struct Environment {
  EnvironmentSpec spec;
  GeneratorMode mode = GeneratorMode::kUniformRandom;
  FeatureTable features;
  TrueReward truth;
  PromptDistribution rho;

  std::size_t num_prompts() const { return spec.num_prompts; }
  std::size_t num_responses() const { return spec.num_responses; }
  std::size_t dim() const { return spec.dim; }

  // <phi(x,y), theta*> + offset(x); throws std::out_of_range on bad indices.
  double reward(std::size_t x, std::size_t y) const;

  // Index distributed per rho; advances the rng stream.
  std::size_t sample_prompt(Rng& rng) const;

  // Checks every type invariant; throws std::runtime_error on violation.
  void validate() const;
};

// Deterministic given spec.seed. Throws if the spec is invalid or if
// rejection resampling for the generator constraints exceeds 10000 attempts.
Environment generate_environment(const EnvironmentSpec& spec, GeneratorMode mode,
                                 RhoMode rho_mode = RhoMode::kUniform);

}  // namespace prefx
