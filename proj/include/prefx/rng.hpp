#pragma once

#include <cstdint>
#include <span>

namespace prefx {

// Counter-based splittable PRNG. The state is a (key, counter) pair and
// every output is a stateless hash of both, so streams can be replayed,
// checkpointed by counter value, and split into independent child streams
// without touching the parent. All stochastic code in this project draws
// through an explicit Rng& so experiments are bit-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double next_double();

  // Standard normal via Box-Muller; always consumes exactly two uniforms.
  double next_normal();

  // Index draw from an (unnormalized up to FP dust) probability vector.
  // Falls back to the last positive entry if the CDF scan runs off the end.
  std::size_t next_categorical(std::span<const double> probs);

  // Independent child stream. Does not advance this stream.
  Rng split(std::uint64_t stream) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace prefx
