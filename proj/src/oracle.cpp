#include "prefx/oracle.hpp"

#include <cmath>

namespace prefx {

double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

double sigmoid_deriv(double z) {
  const double s = sigmoid(z);
  return s * (1.0 - s);
}

double pref_prob(const Environment& env, std::size_t x, std::size_t y, std::size_t yp) {
  return sigmoid(env.reward(x, y) - env.reward(x, yp));
}

PreferenceSample label(const Environment& env, std::size_t x, std::size_t y1, std::size_t y2,
                       Rng& rng) {
  // pref_prob is exactly 1/2 when y1 == y2, so the same draw doubles as
  // the fair coin for coincident responses.
  const double p = pref_prob(env, x, y1, y2);
  const double u = rng.next_double();
  if (u < p) return {x, y1, y2};
  return {x, y2, y1};
}

}  // namespace prefx
