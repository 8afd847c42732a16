#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pwrctl/model.hpp"
#include "pwrctl/multicarrier.hpp"

namespace pwrctl {

inline constexpr int kSchemaVersion = 1;

/// Random placement: transmitters uniform in a square, each receiver at a
/// uniform angle and distance in [min, max] from its transmitter. Gains are
/// h_ki = d(k -> i)^-alpha.
struct GeneratorSpec {
  std::size_t num_links = 0;
  double area_size = 0.0;           ///< side of the square, m
  double path_loss_exponent = 0.0;  ///< alpha in [2, 6]
  double min_tx_rx_distance = 0.0;  ///< m
  double max_tx_rx_distance = 0.0;  ///< m; 0 means 2 * min_tx_rx_distance
  std::uint64_t seed = 0;

  bool operator==(const GeneratorSpec&) const = default;
};

struct CarrierSpec {
  std::vector<Matrix> gains;  ///< per carrier, gains[f](k, i)
  Matrix noise;               ///< links x carriers
  Matrix p_cap;               ///< links x carriers, +inf for no cap
  Vector p_budget;            ///< per link, +inf for none
  Vector u_min;               ///< per link, -inf for none
  Vector v_max;               ///< per link, +inf for none
  UtilitySpec objective_utility{Utility::log()};
  UtilitySpec qos_utility{Utility::rate()};
  QosMode qos_mode = QosMode::PerLink;
  std::optional<Matrix> gamma_target;

  bool operator==(const CarrierSpec&) const = default;
};

struct SolverOverrides {
  std::optional<double> tol;
  std::optional<long> max_iter;
  std::optional<std::string> algo;
  std::optional<int> async_staleness;
  std::optional<double> noise;
  std::optional<std::uint64_t> seed;
  std::optional<bool> allow_nonconcave;

  bool operator==(const SolverOverrides&) const = default;
};

/// Versioned scenario document. Explicit gains take precedence over the
/// generator; when both are present the generator is provenance only.
struct ScenarioFile {
  int schema_version = kSchemaVersion;
  std::string name;
  std::optional<Matrix> gains;  ///< gains(k, i): transmitter k to receiver i
  std::optional<GeneratorSpec> generator;
  Vector noise;
  Vector p_min, p_max;
  Vector gamma_min, gamma_max;  ///< gamma_max +inf is written as null
  std::optional<Vector> gamma_target;
  UtilitySpec utility{Utility::log()};
  std::optional<CarrierSpec> carriers;
  SolverOverrides solver;

  std::size_t num_links() const;
  bool operator==(const ScenarioFile&) const = default;
};

/// Validates and converts. Throws InputError listing every problem found.
ScenarioFile parse_scenario(const nlohmann::json& doc);
nlohmann::json emit_scenario(const ScenarioFile& s);

/// Canonical text: sorted keys, shortest round-trip numbers, trailing newline.
std::string dump_scenario(const ScenarioFile& s);
ScenarioFile load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path, const ScenarioFile& s);

/// Hex SHA-256 of canonical JSON text.
std::string content_digest(const nlohmann::json& doc);

/// Gains from a placement spec. Deterministic in spec.seed.
Matrix generate_gains(const GeneratorSpec& spec);

/// Scenario with generated gains, the generator recorded as provenance,
/// uniform noise and power cap, log utility.
ScenarioFile generate(GeneratorSpec spec, std::uint64_t seed, double noise = 1e-9, double p_max = 1.0);

NetworkModel to_model(const ScenarioFile& s);
MultiCarrierModel to_mc_model(const ScenarioFile& s);
CarrierUtilitySplit to_split(const ScenarioFile& s);

nlohmann::json utility_to_json(const UtilitySpec& u);
UtilitySpec utility_from_json(const nlohmann::json& j, std::size_t num_links);

}  // namespace pwrctl
