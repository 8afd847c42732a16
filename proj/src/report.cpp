#include "pwrctl/report.hpp"

#include <cmath>

namespace pwrctl {

using nlohmann::json;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(finite_or_null(x));
  return a;
}

json matrix_json(const Matrix& m) {
  json a = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    a.push_back(vector_json(Vector(row.begin(), row.end())));
  }
  return a;
}

json to_json(const RunReport& r) {
  return {{"command", r.command},     {"tool_version", r.tool_version}, {"input_digest", r.input_digest},
          {"seed", r.seed},           {"args", r.args},                 {"results", r.results},
          {"wall_time_s", r.wall_time_s}};
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.command = j.at("command").get<std::string>();
  r.tool_version = j.at("tool_version").get<std::string>();
  r.input_digest = j.at("input_digest").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.args = j.at("args").get<std::vector<std::string>>();
  r.results = j.at("results");
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

json to_json(const FeasibilityVerdict& v) {
  json j = {{"rho", v.rho}, {"status", to_string(v.status)}, {"feasible", v.status == FeasibilityStatus::Feasible}};
  j["p_star"] = v.p_star ? vector_json(*v.p_star) : json(nullptr);
  json viol = json::array();
  for (const auto& b : v.bound_violations)
    viol.push_back({{"link", b.link},
                    {"kind", b.kind == BoundViolation::Kind::AboveMax ? "above_max" : "below_min"},
                    {"value", b.value},
                    {"bound", b.bound}});
  j["bound_violations"] = viol;
  return j;
}

json to_json(const FixedPointResult& r) {
  json j = {{"p_bar", vector_json(r.p_bar)},
            {"iterations", r.iterations},
            {"residual", finite_or_null(r.residual)},
            {"converged", r.converged}};
  j["schedule_seed"] = r.schedule_seed ? json(*r.schedule_seed) : json(nullptr);
  return j;
}

namespace {

json check_json(const PropertyCheck& c) {
  json w = json::array();
  for (const auto& x : c.witnesses)
    w.push_back({{"link", x.link},
                 {"p", vector_json(x.p)},
                 {"p_prime", vector_json(x.p_prime)},
                 {"alpha", x.alpha},
                 {"lhs", finite_or_null(x.lhs)},
                 {"rhs", finite_or_null(x.rhs)}});
  return {{"name", c.name}, {"checks", c.checks}, {"failures", c.failures}, {"passed", c.passed()}, {"witnesses", w}};
}

json kkt_json(double stat, double primal, double comp) {
  return {{"stationarity_inf_norm", finite_or_null(stat)},
          {"primal_violation", finite_or_null(primal)},
          {"comp_slack_max", finite_or_null(comp)}};
}

}  // namespace

json to_json(const PropertyReport& r) {
  return {{"positivity", check_json(r.positivity)},
          {"monotonicity", check_json(r.monotonicity)},
          {"scalability", check_json(r.scalability)},
          {"all_passed", r.all_passed()}};
}

json to_json(const LogSolution& s) {
  const auto& m = s.multipliers;
  return {{"p", vector_json(s.p)},
          {"y", vector_json(s.vars.y)},
          {"z", vector_json(s.vars.z)},
          {"objective", finite_or_null(s.objective)},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"status", to_string(s.status)},
          {"diagnostic", s.diagnostic},
          {"multipliers",
           {{"lambda_l", vector_json(m.lambda_l)},
            {"lambda_u", vector_json(m.lambda_u)},
            {"mu", vector_json(m.mu)},
            {"nu", vector_json(m.nu)}}},
          {"kkt", kkt_json(s.kkt.stationarity_inf_norm, s.kkt.primal_violation, s.kkt.comp_slack_max)}};
}

json to_json(const McSolution& s) {
  json r = kkt_json(s.residuals.stationarity_inf_norm, s.residuals.budget_violation, s.residuals.comp_slack_max);
  r.erase("primal_violation");
  r["budget_violation"] = finite_or_null(s.residuals.budget_violation);
  r["qos_violation"] = finite_or_null(s.residuals.qos_violation);
  return {{"p", matrix_json(s.p)},
          {"budget_dual", vector_json(s.budget_dual)},
          {"qos_dual", matrix_json(s.qos_dual)},
          {"objective", finite_or_null(s.objective)},
          {"iterations", s.iterations},
          {"dual_iterations", s.dual_iterations},
          {"converged", s.converged},
          {"status", to_string(s.status)},
          {"diagnostic", s.diagnostic},
          {"residuals", r}};
}

json to_json(const OracleResult& r) {
  return {{"p_best", vector_json(r.p_best)}, {"objective", finite_or_null(r.objective)}, {"evaluations", r.evaluations}};
}

}  // namespace pwrctl
