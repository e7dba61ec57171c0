#include "prefx/rng.hpp"

#include <cmath>
#include <numbers>

namespace prefx {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kStreamSalt = 0xBB67AE8584CAA73Bull;
constexpr std::uint64_t kCounterSalt = 0x6A09E667F3BCC909ull;

// SplitMix64 finalizer (Stafford mix13).
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : key_(mix64(seed + kGolden)), counter_(0) {}

std::uint64_t Rng::next_u64() {
  const std::uint64_t c = counter_++;
  return mix64(key_ ^ mix64(c * kGolden + kCounterSalt));
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::next_categorical(std::span<const double> probs) {
  const double u = next_double();
  double cum = 0.0;
  std::size_t last_positive = 0;
  bool seen_positive = false;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) {
      last_positive = i;
      seen_positive = true;
    }
    cum += probs[i];
    if (u < cum) return i;
  }
  return seen_positive ? last_positive : probs.size() - 1;
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(mix64(key_ + mix64(stream * kGolden + kStreamSalt)), 0);
}

}  // namespace prefx
