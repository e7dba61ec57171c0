#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "prefx/algorithms.hpp"
#include "prefx/env.hpp"
#include "prefx/policy.hpp"
#include "prefx/verify.hpp"

namespace prefx {

// Shortest decimal that round-trips to the same double; the single
// formatting rule behind byte-deterministic artifacts.
std::string format_double(double v);

nlohmann::json env_to_json(const Environment& env);
Environment env_from_json(const nlohmann::json& j);

nlohmann::json policy_to_json(const TabularPolicy& pi);
TabularPolicy policy_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const CheckReport& rep);

// One row per iteration, fixed column order:
//   iter,interval,dataset_size,labels_used,loss_chosen,loss_min,bonus_term,
//   indicator,subopt_iterate,subopt_mixture,pref_regret,cum_pref_regret,
//   rng_counter,theta_0..theta_{d-1}
// Metric columns are left empty when the trace was collected without
// per-iteration metrics. Wall-clock is in-memory only and never emitted.
std::string trace_to_csv(const RunTrace& trace, std::size_t dim);

// Serialize with a trailing newline, keys in stable (sorted) order.
std::string json_to_string(const nlohmann::json& j);

}  // namespace prefx
