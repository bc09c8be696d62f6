#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "fairlot/model.hpp"

namespace fairlot {

using json = nlohmann::json;

/// Distributions and lotteries are emitted with 12 significant digits.
inline double sig12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline json to_json(const Distribution& d) {
  json arr = json::array();
  for (double v : d.values) arr.push_back(sig12(v));
  return arr;
}

inline json to_json(const Lottery& l) {
  json arr = json::array();
  for (double w : l.weights) arr.push_back(sig12(w));
  return arr;
}

namespace detail {

inline std::string rel_name(Rel r) {
  switch (r) {
    case Rel::le: return "<=";
    case Rel::ge: return ">=";
    default: return "=";
  }
}

inline Rel rel_of(const std::string& s) {
  if (s == "<=") return Rel::le;
  if (s == ">=") return Rel::ge;
  if (s == "=" || s == "==") return Rel::eq;
  throw Error("instance json: unknown relation '" + s + "'");
}

inline json domain_to_json(const VarDomain& d) {
  return json{{"lo", d.lo}, {"hi", d.hi}, {"int", d.integral}};
}

inline VarDomain domain_of(const json& j) {
  VarDomain d;
  d.lo = j.at("lo").get<double>();
  d.hi = j.contains("hi") && j.at("hi").is_null() ? kInf : j.at("hi").get<double>();
  d.integral = j.value("int", true);
  return d;
}

}  // namespace detail

inline json instance_to_json(const IlpInstance& inst) {
  json j;
  j["n_agents"] = inst.n_agents;
  j["aux"] = inst.aux_count();
  j["objective"] = {{"v", inst.agent_objective}, {"w", inst.aux_objective}};
  j["mode"] = inst.mode == Mode::dichotomous ? "dichotomous" : "cardinal";
  if (!inst.name.empty()) j["name"] = inst.name;
  json rows = json::array();
  for (const auto& row : inst.rows) {
    json coeffs = json::object();
    for (auto [idx, a] : row.coeffs) {
      std::string key = idx < inst.n_agents ? "x" + std::to_string(idx)
                                            : "y" + std::to_string(idx - inst.n_agents);
      if (coeffs.contains(key))
        coeffs[key] = coeffs[key].get<double>() + a;
      else
        coeffs[key] = a;
    }
    rows.push_back({{"coeffs", coeffs}, {"rel", detail::rel_name(row.rel)}, {"rhs", row.rhs}});
  }
  j["rows"] = rows;
  json agents = json::array(), aux = json::array();
  for (const auto& d : inst.agent_domain) agents.push_back(detail::domain_to_json(d));
  for (const auto& d : inst.aux_domain) aux.push_back(detail::domain_to_json(d));
  j["domains"] = {{"agents", agents}, {"aux", aux}};
  return j;
}

inline IlpInstance instance_from_json(const json& j) {
  IlpInstance inst;
  inst.n_agents = j.at("n_agents").get<int>();
  int aux = j.value("aux", 0);
  inst.mode = j.value("mode", std::string("dichotomous")) == "cardinal" ? Mode::cardinal
                                                                        : Mode::dichotomous;
  inst.name = j.value("name", std::string());
  inst.agent_objective = j.at("objective").at("v").get<std::vector<double>>();
  inst.aux_objective = j.at("objective").contains("w")
                           ? j.at("objective").at("w").get<std::vector<double>>()
                           : std::vector<double>(aux, 0.0);

  inst.agent_domain.assign(inst.n_agents, VarDomain::binary());
  inst.aux_domain.assign(inst.aux_objective.size(), VarDomain::binary());
  if (j.contains("domains")) {
    const json& dom = j.at("domains");
    if (dom.contains("agents")) {
      auto arr = dom.at("agents");
      for (size_t i = 0; i < arr.size() && i < inst.agent_domain.size(); ++i)
        inst.agent_domain[i] = detail::domain_of(arr[i]);
    }
    if (dom.contains("aux")) {
      auto arr = dom.at("aux");
      for (size_t i = 0; i < arr.size() && i < inst.aux_domain.size(); ++i)
        inst.aux_domain[i] = detail::domain_of(arr[i]);
    }
  }

  for (const auto& rj : j.at("rows")) {
    LinearRow row;
    row.rel = detail::rel_of(rj.at("rel").get<std::string>());
    row.rhs = rj.at("rhs").get<double>();
    for (auto it = rj.at("coeffs").begin(); it != rj.at("coeffs").end(); ++it) {
      const std::string& key = it.key();
      if (key.empty() || (key[0] != 'x' && key[0] != 'y'))
        throw Error("instance json: coefficient keys look like x3 or y0");
      int idx = std::stoi(key.substr(1));
      if (key[0] == 'y') idx += inst.n_agents;
      row.coeffs.push_back({idx, it.value().get<double>()});
    }
    inst.rows.push_back(std::move(row));
  }
  inst.validate();
  return inst;
}

inline json solution_to_json(const Solution& s) {
  return json{{"x", s.x}, {"y", s.y}, {"objective", s.objective}};
}

inline Solution solution_from_json(const json& j) {
  Solution s;
  s.x = j.at("x").get<std::vector<double>>();
  s.y = j.value("y", std::vector<double>());
  s.objective = j.value("objective", 0.0);
  return s;
}

/// Pools stream as JSON lines: a meta line, then one solution per line.
inline void write_pool_jsonl(std::ostream& out, const SolutionPool& pool) {
  out << json{{"z_star", pool.z_star}, {"complete", pool.complete}, {"count", pool.size()}}.dump()
      << "\n";
  for (const auto& s : pool.solutions()) out << solution_to_json(s).dump() << "\n";
}

inline SolutionPool read_pool_jsonl(std::istream& in) {
  SolutionPool pool;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (first) {
      pool.z_star = j.value("z_star", 0.0);
      pool.complete = j.value("complete", false);
      first = false;
      continue;
    }
    pool.add(solution_from_json(j));
  }
  return pool;
}

inline json report_to_json(const RuleReport& rep) {
  json j;
  j["rule"] = rep.rule;
  j["distribution"] = to_json(rep.distribution);
  json lot = json::array();
  for (int s = 0; s < rep.lottery.size(); ++s)
    if (rep.lottery.weights[s] > 0.0)
      lot.push_back({{"solution_id", s}, {"weight", sig12(rep.lottery.weights[s])}});
  j["lottery"] = lot;
  j["iterations"] = rep.iterations;
  j["pricing_calls"] = rep.pricing_calls;
  j["master_solves"] = rep.master_solves;
  j["wall_time_s"] = rep.wall_time_s;
  if (std::isfinite(rep.kkt_residual)) j["kkt_residual"] = rep.kkt_residual;
  if (std::isfinite(rep.condition_slack)) j["condition_slack"] = rep.condition_slack;
  if (std::isfinite(rep.first_stage_value)) j["first_stage_value"] = sig12(rep.first_stage_value);
  j["approximate"] = rep.approximate;
  if (!rep.std_error.empty()) {
    json se = json::array();
    for (double v : rep.std_error) se.push_back(sig12(v));
    j["std_error"] = se;
  }
  if (rep.rejected > 0) j["rejected"] = rep.rejected;
  return j;
}

}  // namespace fairlot
