#pragma once

#include <cstddef>

#include "prefx/env.hpp"
#include "prefx/rng.hpp"

namespace prefx {

// One labeled comparison: prompt, winning response, losing response.
struct PreferenceSample {
  std::size_t x = 0;
  std::size_t y_w = 0;
  std::size_t y_l = 0;
};

// Numerically stable logistic sigmoid, exact symmetry sigma(z)+sigma(-z)=1
// up to 1 ulp; safe for |z| up to ~700.
double sigmoid(double z);

// log(sigma(z)) without overflow/underflow.
double log_sigmoid(double z);

// sigma'(z) = sigma(z) * (1 - sigma(z)).
double sigmoid_deriv(double z);

// Bradley-Terry win probability of y over y' under the true reward.
double pref_prob(const Environment& env, std::size_t x, std::size_t y, std::size_t yp);

// Stochastic preference label. y_w = y1 with probability P*(y1 > y2 | x);
// coincident responses get a fair coin. Always consumes one uniform.
PreferenceSample label(const Environment& env, std::size_t x, std::size_t y1, std::size_t y2,
                       Rng& rng);

}  // namespace prefx
