#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prefx/env.hpp"
#include "prefx/policy.hpp"

namespace prefx {

// All metrics are population-exact sums over the finite space; rho, pi and
// r* are fully known so nothing here is sampled.

// E_{x~rho}[E_{y~pi*} r* - E_{y~pi} r*] with pi* = greedy_policy(r*).
double subopt(const TabularPolicy& pi, const Environment& env);

// Single-round preference-regret integrand against a fixed sampler:
//   E_{x~rho, y*~pi*, y~pi, y'~pi_sam}[P*(y* > y'|x) - P*(y > y'|x)].
double pref_regret_term(const TabularPolicy& pi, const TabularPolicy& pi_sam,
                        const Environment& env);

// E_{x~rho, y~pi_a, y'~pi_b}[P*(y > y'|x)].
double winrate(const TabularPolicy& pi_a, const TabularPolicy& pi_b, const Environment& env);

// Probability mass of r*(x, y) under x~rho, y~pi, binned over [0, r_max].
std::vector<double> reward_histogram(const TabularPolicy& pi, const Environment& env,
                                     std::size_t bins);

// 0.5 * sum |h1 - h2|.
double tv_distance(std::span<const double> h1, std::span<const double> h2);

}  // namespace prefx
