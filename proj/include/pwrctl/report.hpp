#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "pwrctl/feasibility.hpp"
#include "pwrctl/fixedpoint.hpp"
#include "pwrctl/logopt.hpp"
#include "pwrctl/multicarrier.hpp"
#include "pwrctl/oracle.hpp"

namespace pwrctl {

inline constexpr const char* kToolVersion = "0.1.0";

/// Output of one CLI command. `args` holds the arguments after the program
/// name, so `pwrctl <args...>` reruns it.
struct RunReport {
  std::string command;
  std::string tool_version = kToolVersion;
  std::string input_digest;  ///< SHA-256 of the canonical scenario JSON, empty if none
  std::uint64_t seed = 0;
  std::vector<std::string> args;
  nlohmann::json results = nlohmann::json::object();
  double wall_time_s = 0.0;
};

nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

/// JSON number, or null for +-inf and NaN.
nlohmann::json finite_or_null(double v);
nlohmann::json vector_json(const std::vector<double>& v);
nlohmann::json matrix_json(const Matrix& m);

nlohmann::json to_json(const FeasibilityVerdict& v);
nlohmann::json to_json(const FixedPointResult& r);
nlohmann::json to_json(const PropertyReport& r);
nlohmann::json to_json(const LogSolution& s);
nlohmann::json to_json(const McSolution& s);
nlohmann::json to_json(const OracleResult& r);

}  // namespace pwrctl
