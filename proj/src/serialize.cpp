#include "prefx/serialize.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace prefx {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json env_to_json(const Environment& env) {
  nlohmann::json j;
  j["kind"] = "environment";
  j["spec"] = {{"d", env.spec.dim},
               {"num_prompts", env.spec.num_prompts},
               {"num_responses", env.spec.num_responses},
               {"r_max", env.spec.r_max},
               {"seed", env.spec.seed}};
  j["mode"] = to_string(env.mode);
  j["rho"] = env.rho.weights;
  j["theta_star"] = env.truth.theta_star;
  j["offsets"] = env.truth.offsets;

  // Feature table as nested arrays, row-major: phi[x][y][j].
  nlohmann::json phi = nlohmann::json::array();
  for (std::size_t x = 0; x < env.num_prompts(); ++x) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t y = 0; y < env.num_responses(); ++y) {
      auto f = env.features.at(x, y);
      row.push_back(std::vector<double>(f.begin(), f.end()));
    }
    phi.push_back(std::move(row));
  }
  j["phi"] = std::move(phi);
  return j;
}

Environment env_from_json(const nlohmann::json& j) {
  Environment env;
  const auto& spec = j.at("spec");
  env.spec.dim = spec.at("d").get<std::size_t>();
  env.spec.num_prompts = spec.at("num_prompts").get<std::size_t>();
  env.spec.num_responses = spec.at("num_responses").get<std::size_t>();
  env.spec.r_max = spec.at("r_max").get<double>();
  env.spec.seed = spec.at("seed").get<std::uint64_t>();
  env.mode = parse_generator_mode(j.at("mode").get<std::string>());
  env.rho.weights = j.at("rho").get<std::vector<double>>();
  env.truth.theta_star = j.at("theta_star").get<std::vector<double>>();
  env.truth.offsets = j.at("offsets").get<std::vector<double>>();

  env.features.num_prompts = env.spec.num_prompts;
  env.features.num_responses = env.spec.num_responses;
  env.features.dim = env.spec.dim;
  env.features.phi.reserve(env.spec.num_prompts * env.spec.num_responses * env.spec.dim);
  for (const auto& row : j.at("phi"))
    for (const auto& vec : row)
      for (const auto& v : vec) env.features.phi.push_back(v.get<double>());
  env.validate();
  return env;
}

nlohmann::json policy_to_json(const TabularPolicy& pi) {
  nlohmann::json j;
  j["kind"] = "policy";
  j["num_prompts"] = pi.num_prompts;
  j["num_responses"] = pi.num_responses;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t x = 0; x < pi.num_prompts; ++x) {
    auto row = pi.row(x);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["probs"] = std::move(rows);
  return j;
}

TabularPolicy policy_from_json(const nlohmann::json& j) {
  TabularPolicy pi;
  pi.num_prompts = j.at("num_prompts").get<std::size_t>();
  pi.num_responses = j.at("num_responses").get<std::size_t>();
  pi.p.reserve(pi.num_prompts * pi.num_responses);
  for (const auto& row : j.at("probs"))
    for (const auto& v : row) pi.p.push_back(v.get<double>());
  pi.validate();
  return pi;
}

nlohmann::json report_to_json(const CheckReport& rep) {
  nlohmann::json j;
  j["name"] = rep.name;
  j["pass"] = rep.pass;
  j["deterministic"] = rep.deterministic;
  j["cases_checked"] = rep.cases_checked;
  j["violations"] = rep.violations;
  j["max_ratio"] = rep.max_ratio;
  j["witness"] = rep.witness;
  j["stats"] = rep.stats;
  return j;
}

std::string trace_to_csv(const RunTrace& trace, std::size_t dim) {
  std::ostringstream out;
  out << "iter,interval,dataset_size,labels_used,loss_chosen,loss_min,bonus_term,indicator,"
         "subopt_iterate,subopt_mixture,pref_regret,cum_pref_regret,rng_counter";
  for (std::size_t j = 0; j < dim; ++j) out << ",theta_" << j;
  out << "\n";

  for (const auto& row : trace.rows) {
    out << row.iter << ',' << row.interval << ',' << row.dataset_size << ',' << row.labels_used
        << ',' << format_double(row.loss_chosen) << ',' << format_double(row.loss_min) << ','
        << format_double(row.bonus_term) << ',' << (row.indicator ? 1 : 0) << ',';
    if (trace.full) {
      out << format_double(row.subopt_iterate) << ',' << format_double(row.subopt_mixture) << ','
          << format_double(row.pref_regret) << ',' << format_double(row.cum_pref_regret);
    } else {
      out << ",,,";
    }
    out << ',' << row.rng_counter;
    for (std::size_t j = 0; j < dim; ++j)
      out << ',' << (j < row.theta.size() ? format_double(row.theta[j]) : "");
    out << "\n";
  }
  return out.str();
}

std::string json_to_string(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace prefx
