#include "pwrctl/scenario.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pwrctl/error.hpp"
#include "pwrctl/rng.hpp"

namespace pwrctl {

using nlohmann::json;

namespace {

/// Collects validation problems so one error lists all of them.
class Issues {
 public:
  void add(std::string msg) { list_.push_back(std::move(msg)); }
  bool empty() const { return list_.empty(); }
  void raise_if_any() const {
    if (list_.empty()) return;
    std::string msg = "invalid scenario:";
    for (const auto& m : list_) msg += "\n  - " + m;
    throw InputError(msg);
  }

 private:
  std::vector<std::string> list_;
};

// +-inf are not representable in JSON; `none` is the value null stands for.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json mat(const Matrix& m) {
  json a = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) a.push_back(vec(Vector(m.row(r).begin(), m.row(r).end())));
  return a;
}

std::optional<double> read_number(const json& j, double none, const std::string& where, Issues& issues) {
  if (j.is_null()) return none;
  if (!j.is_number()) {
    issues.add(where + ": expected a number or null");
    return std::nullopt;
  }
  return j.get<double>();
}

/// Scalar (broadcast), null (all `none`) or array of length n.
Vector read_vector(const json& doc, const char* key, std::size_t n, double fallback, double none, Issues& issues,
                   const std::string& prefix = "") {
  const std::string where = prefix + key;
  if (!doc.contains(key)) return Vector(n, fallback);
  const json& j = doc.at(key);
  if (j.is_array()) {
    if (j.size() != n) {
      issues.add(where + ": expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
      return Vector(n, fallback);
    }
    Vector out(n, fallback);
    for (std::size_t i = 0; i < n; ++i)
      if (auto v = read_number(j[i], none, where + "[" + std::to_string(i) + "]", issues)) out[i] = *v;
    return out;
  }
  if (auto v = read_number(j, none, where, issues)) return Vector(n, *v);
  return Vector(n, fallback);
}

std::optional<Matrix> read_matrix(const json& j, std::size_t rows, std::size_t cols, double none,
                                  const std::string& where, Issues& issues) {
  if (j.is_number() || j.is_null()) {
    auto v = read_number(j, none, where, issues);
    return v ? std::optional<Matrix>(Matrix(rows, cols, *v)) : std::nullopt;
  }
  if (!j.is_array() || j.size() != rows) {
    issues.add(where + ": expected " + std::to_string(rows) + " rows");
    return std::nullopt;
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      issues.add(where + "[" + std::to_string(r) + "]: expected " + std::to_string(cols) + " entries");
      return std::nullopt;
    }
    for (std::size_t c = 0; c < cols; ++c) {
      auto v = read_number(j[r][c], none, where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]", issues);
      if (!v) return std::nullopt;
      m(r, c) = *v;
    }
  }
  return m;
}

Utility utility_entry(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    throw InputError("utility entry needs a string 'family'");
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "log") return Utility::log();
  if (fam == "rate") return Utility::rate();
  if (fam == "alpha_fair") {
    if (!j.contains("alpha") || !j.at("alpha").is_number()) throw InputError("alpha_fair utility needs numeric 'alpha'");
    try {
      return Utility::alpha_fair(j.at("alpha").get<double>());
    } catch (const DomainError& e) {
      throw InputError(e.what());
    }
  }
  throw InputError("unknown utility family '" + fam + "' (expected log, alpha_fair or rate)");
}

json utility_entry_json(const Utility& u) {
  switch (u.family()) {
    case Utility::Family::Log:
      return {{"family", "log"}};
    case Utility::Family::Rate:
      return {{"family", "rate"}};
    case Utility::Family::AlphaFair:
      return {{"family", "alpha_fair"}, {"alpha", u.alpha()}};
    case Utility::Family::Tabulated:
      break;
  }
  throw InputError("tabulated utility '" + u.label() + "' cannot be written to a scenario file");
}

GeneratorSpec read_generator(const json& j, Issues& issues) {
  GeneratorSpec g;
  auto field = [&](const char* key, auto& out, bool required) {
    if (!j.contains(key)) {
      if (required) issues.add(std::string("generator.") + key + ": required");
      return;
    }
    const json& v = j.at(key);
    using T = std::decay_t<decltype(out)>;
    if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return issues.add(std::string("generator.") + key + ": expected a number");
      out = v.get<double>();
    } else {
      if (!v.is_number_unsigned()) return issues.add(std::string("generator.") + key + ": expected a nonnegative integer");
      out = v.get<T>();
    }
  };
  field("num_links", g.num_links, true);
  field("area_size", g.area_size, true);
  field("path_loss_exponent", g.path_loss_exponent, true);
  field("min_tx_rx_distance", g.min_tx_rx_distance, true);
  field("max_tx_rx_distance", g.max_tx_rx_distance, false);
  field("seed", g.seed, true);
  if (g.num_links < 1) issues.add("generator.num_links: must be >= 1");
  if (!(g.area_size > 0.0)) issues.add("generator.area_size: must be positive");
  if (!(g.path_loss_exponent >= 2.0 && g.path_loss_exponent <= 6.0))
    issues.add("generator.path_loss_exponent: must lie in [2, 6]");
  if (!(g.min_tx_rx_distance > 0.0)) issues.add("generator.min_tx_rx_distance: must be positive");
  if (g.max_tx_rx_distance != 0.0 && !(g.max_tx_rx_distance >= g.min_tx_rx_distance))
    issues.add("generator.max_tx_rx_distance: must be >= min_tx_rx_distance");
  return g;
}

json generator_json(const GeneratorSpec& g) {
  json j = {{"num_links", g.num_links},
            {"area_size", g.area_size},
            {"path_loss_exponent", g.path_loss_exponent},
            {"min_tx_rx_distance", g.min_tx_rx_distance},
            {"seed", g.seed}};
  if (g.max_tx_rx_distance != 0.0) j["max_tx_rx_distance"] = g.max_tx_rx_distance;
  return j;
}

}  // namespace

std::size_t ScenarioFile::num_links() const {
  if (gains) return gains->rows();
  if (generator) return generator->num_links;
  return noise.size();
}

json utility_to_json(const UtilitySpec& u) {
  if (u.uniform()) return utility_entry_json(u.at(0));
  json a = json::array();
  for (const auto& e : u.entries()) a.push_back(utility_entry_json(e));
  return a;
}

UtilitySpec utility_from_json(const json& j, std::size_t num_links) {
  if (j.is_array()) {
    if (j.size() != num_links)
      throw InputError("utility list has " + std::to_string(j.size()) + " entries, expected " + std::to_string(num_links));
    std::vector<Utility> list;
    for (const auto& e : j) list.push_back(utility_entry(e));
    return UtilitySpec(std::move(list));
  }
  return UtilitySpec(utility_entry(j));
}

ScenarioFile parse_scenario(const json& doc) {
  Issues issues;
  if (!doc.is_object()) throw InputError("scenario must be a JSON object");
  ScenarioFile s;
  if (!doc.contains("schema_version") || !doc.at("schema_version").is_number_integer())
    issues.add("schema_version: required integer");
  else if (doc.at("schema_version").get<int>() != kSchemaVersion)
    issues.add("schema_version: unsupported version " + doc.at("schema_version").dump());
  if (doc.contains("name")) {
    if (doc.at("name").is_string()) s.name = doc.at("name").get<std::string>();
    else issues.add("name: expected a string");
  }

  if (doc.contains("generator")) {
    if (doc.at("generator").is_object()) s.generator = read_generator(doc.at("generator"), issues);
    else issues.add("generator: expected an object");
  }
  std::size_t n = 0;
  if (doc.contains("gains")) {
    const json& g = doc.at("gains");
    const std::size_t rows = g.is_array() ? g.size() : 0;
    if (rows == 0) issues.add("gains: expected a nonempty square array");
    else if (auto m = read_matrix(g, rows, rows, 0.0, "gains", issues)) s.gains = std::move(*m);
    n = rows;
  } else if (s.generator) {
    n = s.generator->num_links;
  } else {
    issues.add("either 'gains' or 'generator' is required");
  }
  if (s.gains && s.generator && s.generator->num_links != n)
    issues.add("generator.num_links disagrees with the size of 'gains'");
  if (n == 0) issues.raise_if_any();  // nothing below can be sized

  if (!doc.contains("noise")) issues.add("noise: required");
  s.noise = read_vector(doc, "noise", n, 0.0, 0.0, issues);
  for (std::size_t i = 0; i < n && doc.contains("noise"); ++i)
    if (!(s.noise[i] > 0.0) || !std::isfinite(s.noise[i])) {
      issues.add("noise: every entry must be positive and finite");
      break;
    }
  const json limits = doc.value("limits", json::object());
  if (!limits.is_object()) issues.add("limits: expected an object");
  s.p_min = read_vector(limits, "p_min", n, 0.0, 0.0, issues, "limits.");
  s.p_max = read_vector(limits, "p_max", n, kInf, kInf, issues, "limits.");
  s.gamma_min = read_vector(limits, "gamma_min", n, 0.0, 0.0, issues, "limits.");
  s.gamma_max = read_vector(limits, "gamma_max", n, kInf, kInf, issues, "limits.");
  if (doc.contains("gamma_target")) s.gamma_target = read_vector(doc, "gamma_target", n, 0.0, 0.0, issues);
  if (doc.contains("utility")) {
    try {
      s.utility = utility_from_json(doc.at("utility"), n);
    } catch (const InputError& e) {
      issues.add(std::string("utility: ") + e.what());
    }
  }

  if (doc.contains("carriers")) {
    const json& c = doc.at("carriers");
    CarrierSpec cs;
    if (!c.is_object() || !c.contains("gains") || !c.at("gains").is_array() || c.at("gains").empty()) {
      issues.add("carriers.gains: required nonempty array of per-carrier gain matrices");
    } else {
      const std::size_t nf = c.at("gains").size();
      for (std::size_t f = 0; f < nf; ++f)
        if (auto m = read_matrix(c.at("gains")[f], n, n, 0.0, "carriers.gains[" + std::to_string(f) + "]", issues))
          cs.gains.push_back(std::move(*m));
      if (!c.contains("noise")) issues.add("carriers.noise: required");
      else if (auto m = read_matrix(c.at("noise"), n, nf, 0.0, "carriers.noise", issues)) cs.noise = std::move(*m);
      cs.p_cap = Matrix(n, nf, kInf);
      if (c.contains("p_cap"))
        if (auto m = read_matrix(c.at("p_cap"), n, nf, kInf, "carriers.p_cap", issues)) cs.p_cap = std::move(*m);
      cs.p_budget = read_vector(c, "p_budget", n, kInf, kInf, issues, "carriers.");
      cs.u_min = read_vector(c, "u_min", n, -kInf, -kInf, issues, "carriers.");
      cs.v_max = read_vector(c, "v_max", n, kInf, kInf, issues, "carriers.");
      try {
        if (c.contains("objective_utility")) cs.objective_utility = utility_from_json(c.at("objective_utility"), n);
        if (c.contains("qos_utility")) cs.qos_utility = utility_from_json(c.at("qos_utility"), n);
      } catch (const InputError& e) {
        issues.add(std::string("carriers: ") + e.what());
      }
      const std::string mode = c.value("qos_mode", std::string("per_link"));
      if (mode == "per_carrier") cs.qos_mode = QosMode::PerCarrier;
      else if (mode != "per_link") issues.add("carriers.qos_mode: expected per_link or per_carrier");
      if (c.contains("gamma_target"))
        if (auto m = read_matrix(c.at("gamma_target"), n, nf, 0.0, "carriers.gamma_target", issues))
          cs.gamma_target = std::move(*m);
    }
    s.carriers = std::move(cs);
  }

  if (doc.contains("solver")) {
    const json& j = doc.at("solver");
    auto& o = s.solver;
    if (!j.is_object()) {
      issues.add("solver: expected an object");
    } else {
      try {
        if (j.contains("tol")) o.tol = j.at("tol").get<double>();
        if (j.contains("max_iter")) o.max_iter = j.at("max_iter").get<long>();
        if (j.contains("algo")) o.algo = j.at("algo").get<std::string>();
        if (j.contains("async_staleness")) o.async_staleness = j.at("async_staleness").get<int>();
        if (j.contains("noise")) o.noise = j.at("noise").get<double>();
        if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("allow_nonconcave")) o.allow_nonconcave = j.at("allow_nonconcave").get<bool>();
      } catch (const json::exception& e) {
        issues.add(std::string("solver: ") + e.what());
      }
      if (o.algo && *o.algo != "g2off" && *o.algo != "g2too") issues.add("solver.algo: expected g2off or g2too");
      if (o.tol && !(*o.tol > 0.0)) issues.add("solver.tol: must be positive");
      if (o.max_iter && *o.max_iter < 1) issues.add("solver.max_iter: must be >= 1");
      if (o.async_staleness && *o.async_staleness < 0) issues.add("solver.async_staleness: must be >= 0");
      if (o.noise && !(*o.noise >= 0.0)) issues.add("solver.noise: must be >= 0");
    }
  }
  issues.raise_if_any();

  // Model invariants (positive direct gains and noise, ordered limits).
  try {
    if (s.gains) (void)to_model(s);
    if (s.carriers) (void)to_mc_model(s);
  } catch (const ModelError& e) {
    issues.add(e.what());
  }
  issues.raise_if_any();
  return s;
}

json emit_scenario(const ScenarioFile& s) {
  json doc;
  doc["schema_version"] = s.schema_version;
  if (!s.name.empty()) doc["name"] = s.name;
  if (s.gains) doc["gains"] = mat(*s.gains);
  if (s.generator) doc["generator"] = generator_json(*s.generator);
  doc["noise"] = vec(s.noise);
  doc["limits"] = {{"p_min", vec(s.p_min)},
                   {"p_max", vec(s.p_max)},
                   {"gamma_min", vec(s.gamma_min)},
                   {"gamma_max", vec(s.gamma_max)}};
  if (s.gamma_target) doc["gamma_target"] = vec(*s.gamma_target);
  doc["utility"] = utility_to_json(s.utility);
  if (s.carriers) {
    const CarrierSpec& c = *s.carriers;
    json g = json::array();
    for (const auto& m : c.gains) g.push_back(mat(m));
    json cj = {{"gains", g},
               {"noise", mat(c.noise)},
               {"p_cap", mat(c.p_cap)},
               {"p_budget", vec(c.p_budget)},
               {"u_min", vec(c.u_min)},
               {"v_max", vec(c.v_max)},
               {"objective_utility", utility_to_json(c.objective_utility)},
               {"qos_utility", utility_to_json(c.qos_utility)},
               {"qos_mode", c.qos_mode == QosMode::PerCarrier ? "per_carrier" : "per_link"}};
    if (c.gamma_target) cj["gamma_target"] = mat(*c.gamma_target);
    doc["carriers"] = cj;
  }
  json solver = json::object();
  const auto& o = s.solver;
  if (o.tol) solver["tol"] = *o.tol;
  if (o.max_iter) solver["max_iter"] = *o.max_iter;
  if (o.algo) solver["algo"] = *o.algo;
  if (o.async_staleness) solver["async_staleness"] = *o.async_staleness;
  if (o.noise) solver["noise"] = *o.noise;
  if (o.seed) solver["seed"] = *o.seed;
  if (o.allow_nonconcave) solver["allow_nonconcave"] = *o.allow_nonconcave;
  if (!solver.empty()) doc["solver"] = solver;
  return doc;
}

std::string dump_scenario(const ScenarioFile& s) { return emit_scenario(s).dump(2) + "\n"; }

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

void save_scenario(const std::filesystem::path& path, const ScenarioFile& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << dump_scenario(s);
}

std::string content_digest(const json& doc) {
  const std::string text = doc.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 0xf]);
  }
  return hex;
}

Matrix generate_gains(const GeneratorSpec& spec) {
  Issues issues;
  (void)read_generator(generator_json(spec), issues);
  issues.raise_if_any();
  constexpr int kMaxAttempts = 10000;
  const std::size_t n = spec.num_links;
  const double dmin = spec.min_tx_rx_distance;
  const double dmax = spec.max_tx_rx_distance > 0.0 ? spec.max_tx_rx_distance : 2.0 * dmin;
  struct Point {
    double x, y;
  };
  auto dist = [](Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); };

  Rng rng(spec.seed);
  std::vector<Point> tx(n), rx(n);
  Vector own(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const Point t{rng.uniform(0.0, spec.area_size), rng.uniform(0.0, spec.area_size)};
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double d = rng.uniform(dmin, dmax);
      const Point r{t.x + d * std::cos(angle), t.y + d * std::sin(angle)};
      // Every receiver keeps its own transmitter as the nearest one.
      placed = true;
      for (std::size_t k = 0; k < i && placed; ++k)
        placed = dist(tx[k], r) >= d && dist(t, rx[k]) >= own[k];
      if (placed) {
        tx[i] = t;
        rx[i] = r;
        own[i] = d;
      }
    }
    if (!placed)
      throw InputError("generator: could not place link " + std::to_string(i) + " after " +
                       std::to_string(kMaxAttempts) + " attempts; enlarge area_size");
  }
  Matrix h(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      h(k, i) = std::pow(std::max(dist(tx[k], rx[i]), dmin), -spec.path_loss_exponent);
  return h;
}

ScenarioFile generate(GeneratorSpec spec, std::uint64_t seed, double noise, double p_max) {
  spec.seed = seed;
  if (!(noise > 0.0)) throw InputError("generate: noise must be positive");
  if (!(p_max > 0.0)) throw InputError("generate: p_max must be positive");
  ScenarioFile s;
  s.name = "generated-" + std::to_string(seed);
  s.gains = generate_gains(spec);
  s.generator = spec;
  const std::size_t n = spec.num_links;
  s.noise = Vector(n, noise);
  s.p_min = Vector(n, 0.0);
  s.p_max = Vector(n, p_max);
  s.gamma_min = Vector(n, 0.0);
  s.gamma_max = Vector(n, kInf);
  return s;
}

NetworkModel to_model(const ScenarioFile& s) {
  const Matrix gains = s.gains ? *s.gains : generate_gains(*s.generator);
  return NetworkModel(gains, s.noise, s.p_min, s.p_max, s.gamma_min, s.gamma_max);
}

MultiCarrierModel to_mc_model(const ScenarioFile& s) {
  if (!s.carriers) throw InputError("scenario has no 'carriers' section");
  const CarrierSpec& c = *s.carriers;
  const std::size_t n = s.num_links(), nf = c.gains.size();
  std::vector<NetworkModel> slices;
  for (std::size_t f = 0; f < nf; ++f) {
    Vector noise(n), cap(n);
    for (std::size_t i = 0; i < n; ++i) {
      noise[i] = c.noise(i, f);
      cap[i] = c.p_cap(i, f);
    }
    slices.emplace_back(c.gains[f], noise, Vector{}, cap);
  }
  return MultiCarrierModel(std::move(slices), c.p_budget, c.u_min, c.v_max);
}

CarrierUtilitySplit to_split(const ScenarioFile& s) {
  if (!s.carriers) throw InputError("scenario has no 'carriers' section");
  CarrierUtilitySplit split;
  split.objective = {s.carriers->objective_utility};
  split.qos = {s.carriers->qos_utility};
  return split;
}

}  // namespace pwrctl
