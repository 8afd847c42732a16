#include "pwrctl/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include "pwrctl/error.hpp"
#include "pwrctl/feasibility.hpp"
#include "pwrctl/fixedpoint.hpp"
#include "pwrctl/logopt.hpp"
#include "pwrctl/multicarrier.hpp"
#include "pwrctl/oracle.hpp"
#include "pwrctl/report.hpp"
#include "pwrctl/scenario.hpp"

namespace pwrctl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Raised by a command that ran to completion but must signal a nonzero exit.
struct ExitWith {
  int code;
};

struct CommonFlags {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<long> max_iter;
  std::optional<std::string> algo;
  std::string out;
  std::string gamma;
  std::optional<int> staleness;
  std::optional<double> noise;
  bool allow_nonconcave = false;
};

struct Context {
  CommonFlags flags;
  std::optional<ScenarioFile> scenario;
  RunReport report;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  const ScenarioFile& need_scenario() const {
    if (!scenario) throw InputError("--scenario is required for '" + report.command + "'");
    return *scenario;
  }
  std::uint64_t seed() const {
    if (flags.seed) return *flags.seed;
    if (scenario && scenario->solver.seed) return *scenario->solver.seed;
    return 0;
  }
  std::optional<double> tol() const {
    if (flags.tol) return flags.tol;
    return scenario ? scenario->solver.tol : std::nullopt;
  }
  std::optional<long> max_iter() const {
    if (flags.max_iter) return flags.max_iter;
    return scenario ? scenario->solver.max_iter : std::nullopt;
  }
  std::string algo() const {
    if (flags.algo) return *flags.algo;
    if (scenario && scenario->solver.algo) return *scenario->solver.algo;
    return "g2off";
  }
  int staleness() const {
    if (flags.staleness) return *flags.staleness;
    if (scenario && scenario->solver.async_staleness) return *scenario->solver.async_staleness;
    return 0;
  }
  bool async_requested() const {
    return flags.staleness.has_value() || (scenario && scenario->solver.async_staleness.has_value());
  }
  double noise() const {
    if (flags.noise) return *flags.noise;
    if (scenario && scenario->solver.noise) return *scenario->solver.noise;
    return 0.0;
  }
  bool allow_nonconcave() const {
    return flags.allow_nonconcave || (scenario && scenario->solver.allow_nonconcave.value_or(false));
  }
  bool has_out() const { return !flags.out.empty(); }
  fs::path out_path(const std::string& name) const { return fs::path(flags.out) / name; }
};

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InputError(what + ": '" + text + "' is not a number");
  }
  if (used != text.size()) throw InputError(what + ": '" + text + "' is not a number");
  return v;
}

/// Uniform target from --gamma X, else the scenario's target vector.
Vector target_from(const Context& ctx, std::size_t n) {
  if (!ctx.flags.gamma.empty()) {
    if (ctx.flags.gamma.find(':') != std::string::npos)
      throw InputError("--gamma takes a single value for '" + ctx.report.command + "'");
    return Vector(n, parse_number(ctx.flags.gamma, "--gamma"));
  }
  if (ctx.scenario && ctx.scenario->gamma_target) return *ctx.scenario->gamma_target;
  throw InputError("an SINR target is required: pass --gamma X or set gamma_target in the scenario");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
}

template <typename Writer>
void write_csv(const Context& ctx, const std::string& name, Writer&& w) {
  if (!ctx.has_out()) return;
  std::ofstream f(ctx.out_path(name), std::ios::binary);
  if (!f) throw InputError("cannot write " + ctx.out_path(name).string());
  w(f);
}

void note_artifact(Context& ctx, const std::string& name) {
  if (!ctx.has_out()) return;
  ctx.report.results["artifacts"].push_back(name);
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

UtilitySpec checked_utility(const Context& ctx, const UtilitySpec& u, std::size_t n) {
  u.check_size(n);
  if (!ctx.allow_nonconcave()) require_log_concave(u, n);
  return u;
}

// ---------------------------------------------------------------- commands

void cmd_check_feas(Context& ctx) {
  const NetworkModel model = to_model(ctx.need_scenario());
  const Vector gamma = target_from(ctx, model.num_links());
  const FeasibilityVerdict v = check_feasibility(model, gamma);
  json r = to_json(v);
  r["gamma_target"] = vector_json(gamma);
  r["max_uniform_scaling"] = finite_or_null(max_uniform_scaling(model, gamma));
  ctx.report.results = r;
  if (v.status != FeasibilityStatus::Feasible) throw ExitWith{kExitInfeasible};
}

void cmd_fixed_point(Context& ctx) {
  const NetworkModel model = to_model(ctx.need_scenario());
  const std::size_t n = model.num_links();
  const Vector gamma = target_from(ctx, n);
  InterferenceMap map = InterferenceMap::target_sinr(model, gamma);
  const bool capped = std::any_of(model.p_max().begin(), model.p_max().end(), [](double v) { return std::isfinite(v); });
  if (capped) map = InterferenceMap::power_capped(map, model.p_max());

  IterationOptions opts;
  if (auto t = ctx.tol()) opts.tol = *t;
  if (auto m = ctx.max_iter()) opts.max_iter = *m;
  opts.record_trajectory = ctx.has_out();
  const Vector p0(n, 0.0);
  FixedPointResult res;
  if (ctx.async_requested()) {
    AsyncSchedule schedule;
    schedule.staleness_bound = ctx.staleness();
    schedule.seed = ctx.seed();
    res = iterate_async(map, p0, schedule, opts);
  } else {
    res = iterate_sync(map, p0, opts);
  }
  json r = to_json(res);
  r["map"] = capped ? "power_capped" : "target_sinr";
  r["mode"] = ctx.async_requested() ? "async" : "sync";
  r["gamma_target"] = vector_json(gamma);
  r["sinr"] = vector_json(sinr(model, res.p_bar));
  ctx.report.results = r;
  write_csv(ctx, "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, res.trajectory); });
  note_artifact(ctx, "trajectory.csv");
  if (!res.converged) throw ExitWith{kExitNoConvergence};
}

LogSolution run_solver(const Context& ctx, const NetworkModel& model, const UtilitySpec& u, bool history) {
  const std::string algo = ctx.algo();
  if (algo == "g2off") {
    G2offConfig cfg;
    if (auto t = ctx.tol()) cfg.tol = *t;
    if (auto m = ctx.max_iter()) cfg.max_iter = *m;
    cfg.allow_nonconcave = ctx.allow_nonconcave();
    cfg.record_history = history;
    return solve_g2off(model, u, cfg);
  }
  if (algo == "g2too") {
    G2tooConfig cfg;
    if (auto t = ctx.tol()) cfg.tol = *t;
    if (auto m = ctx.max_iter()) cfg.max_iter = *m;
    cfg.allow_nonconcave = ctx.allow_nonconcave();
    cfg.record_history = history;
    cfg.schedule.staleness_bound = ctx.staleness();
    cfg.schedule.seed = ctx.seed();
    cfg.measurement_noise = ctx.noise();
    return solve_g2too(model, u, cfg);
  }
  throw InputError("--algo must be g2off or g2too, got '" + algo + "'");
}

int solution_exit(SolveStatus status, bool converged) {
  if (status == SolveStatus::Infeasible) return kExitInfeasible;
  return converged ? kExitOk : kExitNoConvergence;
}

void cmd_solve(Context& ctx) {
  const ScenarioFile& s = ctx.need_scenario();
  const NetworkModel model = to_model(s);
  const UtilitySpec u = checked_utility(ctx, s.utility, model.num_links());
  const LogSolution sol = run_solver(ctx, model, u, ctx.has_out());
  json r = to_json(sol);
  r["algo"] = ctx.algo();
  r["sinr"] = vector_json(sinr(model, sol.p));
  ctx.report.results = r;
  write_csv(ctx, "history.csv", [&](std::ostream& os) { write_history_csv(os, sol.history); });
  note_artifact(ctx, "history.csv");
  if (int code = solution_exit(sol.status, sol.converged)) throw ExitWith{code};
}

McConfig mc_config(const Context& ctx, const ScenarioFile& s) {
  McConfig cfg;
  if (auto t = ctx.tol()) cfg.tol = *t;
  if (auto m = ctx.max_iter()) cfg.max_iter = *m;
  cfg.allow_nonconcave = ctx.allow_nonconcave();
  cfg.qos_mode = s.carriers->qos_mode;
  return cfg;
}

void cmd_solve_mc(Context& ctx) {
  const ScenarioFile& s = ctx.need_scenario();
  const MultiCarrierModel model = to_mc_model(s);
  const CarrierUtilitySplit split = to_split(s);
  split.check_size(model.num_links(), model.num_carriers());
  const McSolution sol = solve_mc(model, split, mc_config(ctx, s));
  json r = to_json(sol);
  r["sinr"] = matrix_json(sinr_mc(model, sol.p));
  json usage = json::array();
  for (const auto& b : budget_check(model, sol.p))
    usage.push_back({{"used", b.used}, {"budget", finite_or_null(b.budget)}, {"slack", finite_or_null(b.slack)}});
  r["budget_usage"] = usage;
  ctx.report.results = r;
  write_csv(ctx, "powers.csv", [&](std::ostream& os) {
    os << "link";
    for (std::size_t f = 0; f < model.num_carriers(); ++f) os << ",p_f" << f + 1;
    os << "\n";
    for (std::size_t i = 0; i < model.num_links(); ++i) {
      os << i + 1;
      for (std::size_t f = 0; f < model.num_carriers(); ++f) os << "," << csv_number(sol.p(i, f));
      os << "\n";
    }
  });
  note_artifact(ctx, "powers.csv");
  if (int code = solution_exit(sol.status, sol.converged)) throw ExitWith{code};
}

/// Evaluates `work(k)` for every k on a small thread pool; rows come back in index order.
std::vector<json> fan_out(std::size_t count, unsigned threads, const std::function<json(std::size_t)>& work) {
  std::vector<json> rows(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        rows[k] = work(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

json gamma_point(const NetworkModel& model, const UtilitySpec& u, double gamma) {
  const FeasibilityVerdict v = check_feasibility(model, Vector(model.num_links(), gamma));
  json row = {{"gamma", gamma},
              {"rho", v.rho},
              {"spectral_feasible", v.rho < 1.0},
              {"feasible", v.status == FeasibilityStatus::Feasible},
              {"status", to_string(v.status)}};
  row["objective"] = v.p_star ? finite_or_null(total_utility(model, *v.p_star, u)) : json(nullptr);
  return row;
}

void write_rows_csv(std::ostream& os, const std::vector<std::string>& cols, const std::vector<json>& rows) {
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const json& v = row.at(cols[c]);
      os << (c ? "," : "");
      if (v.is_null()) os << "";
      else if (v.is_boolean()) os << (v.get<bool>() ? 1 : 0);
      else if (v.is_number()) os << csv_number(v.get<double>());
      else os << v.get<std::string>();
    }
    os << "\n";
  }
}

void cmd_sweep(Context& ctx, const std::string& budget_range, unsigned threads) {
  const ScenarioFile& s = ctx.need_scenario();
  if (budget_range.empty() == ctx.flags.gamma.empty())
    throw InputError("sweep needs exactly one of --gamma LO:HI:STEP or --budget LO:HI:STEP");
  std::vector<json> rows;
  std::vector<std::string> cols;
  if (!ctx.flags.gamma.empty()) {
    const NetworkModel model = to_model(s);
    const Vector grid = parse_range(ctx.flags.gamma);
    rows = fan_out(grid.size(), threads, [&](std::size_t k) { return gamma_point(model, s.utility, grid[k]); });
    cols = {"gamma", "rho", "spectral_feasible", "feasible", "status", "objective"};
    ctx.report.results["parameter"] = "gamma";
    ctx.report.results["max_uniform_scaling"] =
        finite_or_null(max_uniform_scaling(model, Vector(model.num_links(), 1.0)));
  } else {
    const MultiCarrierModel base = to_mc_model(s);
    const CarrierUtilitySplit split = to_split(s);
    const McConfig cfg = mc_config(ctx, s);
    const Vector grid = parse_range(budget_range);
    rows = fan_out(grid.size(), threads, [&](std::size_t k) {
      const MultiCarrierModel m(base.carriers(), Vector(base.num_links(), grid[k]), base.u_min(), base.v_max());
      const McSolution sol = solve_mc(m, split, cfg);
      return json{{"budget", grid[k]},
                  {"objective", finite_or_null(sol.objective)},
                  {"converged", sol.converged},
                  {"status", to_string(sol.status)}};
    });
    cols = {"budget", "objective", "converged", "status"};
    ctx.report.results["parameter"] = "budget";
  }
  ctx.report.results["rows"] = rows;
  write_csv(ctx, "sweep.csv", [&](std::ostream& os) { write_rows_csv(os, cols, rows); });
  note_artifact(ctx, "sweep.csv");
}

/// I_i(p) = q_i(p)^2 / h_ii: positive and monotone but not scalable.
InterferenceMap quadratic_map(const NetworkModel& model) {
  return InterferenceMap::custom(
      model.num_links(),
      [model](std::span<const double> p, std::span<double> out) {
        const Vector q = interference(model, p);
        for (std::size_t i = 0; i < q.size(); ++i) out[i] = q[i] * q[i] / model.direct(i);
      },
      "quadratic");
}

void cmd_certify(Context& ctx, const std::string& which, std::size_t pairs) {
  const NetworkModel model = to_model(ctx.need_scenario());
  const std::size_t n = model.num_links();
  std::optional<InterferenceMap> map;
  if (which == "target") {
    map = InterferenceMap::target_sinr(model, target_from(ctx, n));
  } else if (which == "capped") {
    Vector cap = model.p_max();
    for (double& c : cap)
      if (!std::isfinite(c)) throw InputError("--map capped needs a finite p_max on every link");
    map = InterferenceMap::power_capped(InterferenceMap::target_sinr(model, target_from(ctx, n)), cap);
  } else if (which == "quadratic") {
    map = quadratic_map(model);
  } else {
    throw InputError("--map must be target, capped or quadratic");
  }
  SamplerConfig sampler;
  sampler.num_pairs = pairs;
  sampler.seed = ctx.seed();
  json r = to_json(certify_standard(*map, sampler));
  r["map"] = which;
  ctx.report.results = r;
}

void cmd_oracle(Context& ctx, int resolution, int rounds) {
  const ScenarioFile& s = ctx.need_scenario();
  const NetworkModel model = to_model(s);
  s.utility.check_size(model.num_links());
  json r = to_json(oracle_gridsearch(model, s.utility, resolution, rounds));
  r["resolution"] = resolution;
  r["refine_rounds"] = rounds;
  ctx.report.results = r;
}

constexpr const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Renders the CSV files next to this script into PNG figures."""
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read(name):
    path = os.path.join(HERE, name)
    if not os.path.exists(path):
        return None
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def col(rows, key):
    return [float(r[key]) if r[key] not in ("", "nan") else float("nan") for r in rows]


def main():
    hist = read("history.csv")
    if hist:
        fig, ax = plt.subplots()
        ax.plot(col(hist, "iter"), col(hist, "objective"))
        ax.set_xlabel("iteration")
        ax.set_ylabel("objective")
        ax.set_title("solver convergence")
        fig.savefig(os.path.join(HERE, "convergence.png"), dpi=120)

    traj = read("trajectory.csv")
    if traj:
        fig, ax = plt.subplots()
        it = col(traj, "iter")
        for key in traj[0]:
            if key.startswith("p_"):
                ax.plot(it, col(traj, key), label=key)
        ax.set_xlabel("iteration")
        ax.set_ylabel("power (W)")
        ax.set_yscale("symlog", linthresh=1e-6)
        ax.legend()
        ax.set_title("fixed-point iterates")
        fig.savefig(os.path.join(HERE, "trajectory.png"), dpi=120)

    sweep = read("sweep.csv")
    if sweep:
        fig, ax = plt.subplots()
        g = col(sweep, "gamma")
        ax.plot(g, col(sweep, "rho"), marker="o", label="rho")
        ax.axhline(1.0, color="gray", linestyle="--")
        ax.set_xlabel("uniform SINR target")
        ax.set_ylabel("spectral radius")
        ax.legend()
        ax.set_title("feasibility sweep")
        fig.savefig(os.path.join(HERE, "sweep.png"), dpi=120)


if __name__ == "__main__":
    main()
)PY";

void cmd_plot(Context& ctx, unsigned threads) {
  if (!ctx.has_out()) throw InputError("plot needs --out DIR");
  const ScenarioFile& s = ctx.need_scenario();
  const NetworkModel model = to_model(s);
  const std::size_t n = model.num_links();

  // Convergence of the selected solver.
  const UtilitySpec u = checked_utility(ctx, s.utility, n);
  const LogSolution sol = run_solver(ctx, model, u, true);
  write_csv(ctx, "history.csv", [&](std::ostream& os) { write_history_csv(os, sol.history); });
  note_artifact(ctx, "history.csv");
  ctx.report.results["solve"] = {{"objective", finite_or_null(sol.objective)},
                                 {"converged", sol.converged},
                                 {"iterations", sol.iterations}};

  // Fixed-point trajectory when a target is known.
  const bool has_target = (!ctx.flags.gamma.empty() && ctx.flags.gamma.find(':') == std::string::npos) ||
                          s.gamma_target.has_value();
  if (has_target) {
    const Vector gamma = target_from(ctx, n);
    if (check_feasibility(model, gamma).status == FeasibilityStatus::Feasible) {
      IterationOptions opts;
      opts.record_trajectory = true;
      const FixedPointResult fp = iterate_sync(InterferenceMap::target_sinr(model, gamma), Vector(n, 0.0), opts);
      write_csv(ctx, "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, fp.trajectory); });
      note_artifact(ctx, "trajectory.csv");
    }
  }

  // Feasibility sweep over a uniform target.
  Vector grid;
  if (!ctx.flags.gamma.empty() && ctx.flags.gamma.find(':') != std::string::npos) {
    grid = parse_range(ctx.flags.gamma);
  } else {
    const double s_star = max_uniform_scaling(model, Vector(n, 1.0));
    const double top = std::isfinite(s_star) ? 1.5 * s_star : 10.0;
    for (int k = 1; k <= 30; ++k) grid.push_back(top * k / 30.0);
  }
  std::vector<json> rows =
      fan_out(grid.size(), threads, [&](std::size_t k) { return gamma_point(model, s.utility, grid[k]); });
  write_csv(ctx, "sweep.csv", [&](std::ostream& os) {
    write_rows_csv(os, {"gamma", "rho", "spectral_feasible", "feasible", "status", "objective"}, rows);
  });
  note_artifact(ctx, "sweep.csv");

  write_text(ctx.out_path("plot.py"), kPlotScript);
  note_artifact(ctx, "plot.py");
}

void cmd_generate(Context& ctx, GeneratorSpec spec, double noise_power, double p_max) {
  const ScenarioFile s = generate(spec, ctx.seed(), noise_power, p_max);
  const std::string text = dump_scenario(s);
  ctx.report.input_digest = content_digest(emit_scenario(s));
  ctx.report.results = {{"num_links", s.num_links()}, {"digest", ctx.report.input_digest}};
  if (ctx.has_out()) {
    write_text(ctx.out_path("scenario.json"), text);
    note_artifact(ctx, "scenario.json");
  } else {
    *ctx.out << text;
    ctx.report.results["printed"] = true;
  }
}

void add_common(CLI::App* sub, CommonFlags& f, bool scenario_required) {
  auto* opt = sub->add_option("--scenario", f.scenario, "Scenario JSON file");
  if (scenario_required) opt->required();
  sub->add_option("--seed", f.seed, "Seed for schedules and sampling");
  sub->add_option("--tol", f.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", f.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
  sub->add_option("--algo", f.algo, "Solver")->check(CLI::IsMember({"g2off", "g2too"}));
  sub->add_option("--out", f.out, "Output directory for the report and CSV artifacts");
  sub->add_option("--gamma", f.gamma, "SINR target X, or LO:HI:STEP for sweeps");
  sub->add_option("--async-staleness", f.staleness, "Staleness bound D of the asynchronous schedule")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--noise", f.noise, "Relative measurement noise bound B")->check(CLI::NonNegativeNumber);
  sub->add_flag("--allow-nonconcave", f.allow_nonconcave, "Skip the log-concavity certificate");
}

}  // namespace

std::vector<double> parse_range(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3) throw InputError("range '" + spec + "' must be LO:HI:STEP");
  const double lo = parse_number(parts[0], "range LO");
  const double hi = parse_number(parts[1], "range HI");
  const double step = parse_number(parts[2], "range STEP");
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(hi) || !std::isfinite(lo))
    throw InputError("range '" + spec + "' needs LO <= HI and STEP > 0");
  const double count = std::floor((hi - lo) / step + 1e-9) + 1.0;
  if (count > 1e6) throw InputError("range '" + spec + "' has too many points");
  std::vector<double> out;
  for (long k = 0; k < static_cast<long>(count); ++k) {
    // Round to 12 significant digits so 0.1 + 19 * 0.1 is exactly 2.
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", lo + static_cast<double>(k) * step);
    out.push_back(std::strtod(buf, nullptr));
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power control for interference networks", "pwrctl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  CommonFlags& f = ctx.flags;

  auto* check = app.add_subcommand("check-feas", "Spectral feasibility of SINR targets and the minimal power");
  add_common(check, f, true);
  auto* fixed = app.add_subcommand("fixed-point", "Fixed-point power iteration toward SINR targets");
  add_common(fixed, f, true);
  auto* solve = app.add_subcommand("solve", "Utility maximization in the log domain");
  add_common(solve, f, true);
  auto* solve_mc_cmd = app.add_subcommand("solve-mc", "Multi-carrier utility maximization under budgets");
  add_common(solve_mc_cmd, f, true);

  auto* sweep = app.add_subcommand("sweep", "Tabulate feasibility and objective over a target or budget range");
  add_common(sweep, f, true);
  std::string budget_range;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  sweep->add_option("--budget", budget_range, "Per-link budget range LO:HI:STEP (multi-carrier)");
  sweep->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* certify = app.add_subcommand("certify-if", "Randomized check of the standard interference axioms");
  add_common(certify, f, true);
  std::string which = "target";
  std::size_t pairs = 1000;
  certify->add_option("--map", which, "Map to check: target, capped or quadratic");
  certify->add_option("--pairs", pairs, "Number of sampled pairs")->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle", "Brute-force grid search (at most 3 links)");
  add_common(oracle, f, true);
  int resolution = 41, rounds = 4;
  oracle->add_option("--resolution", resolution, "Grid points per axis")->check(CLI::Range(2, 1000));
  oracle->add_option("--refine-rounds", rounds, "Shrink-and-regrid rounds")->check(CLI::Range(0, 50));

  auto* plot = app.add_subcommand("plot", "Emit convergence and sweep CSVs with a plotting script");
  add_common(plot, f, true);
  plot->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("generate", "Random placement scenario");
  add_common(gen, f, false);
  GeneratorSpec spec;
  spec.num_links = 4;
  spec.area_size = 100.0;
  spec.path_loss_exponent = 4.0;
  spec.min_tx_rx_distance = 10.0;
  double noise_power = 1e-9, p_max = 1.0;
  gen->add_option("--num-links", spec.num_links, "Number of links");
  gen->add_option("--area-size", spec.area_size, "Side of the square area, m");
  gen->add_option("--path-loss", spec.path_loss_exponent, "Path-loss exponent in [2, 6]");
  gen->add_option("--min-distance", spec.min_tx_rx_distance, "Minimum transmitter-receiver distance, m");
  gen->add_option("--max-distance", spec.max_tx_rx_distance, "Maximum transmitter-receiver distance, m");
  gen->add_option("--noise-power", noise_power, "Receiver noise, W");
  gen->add_option("--p-max", p_max, "Power cap, W");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalidInput;
  }

  CLI::App* active = app.get_subcommands().front();
  ctx.report.command = active->get_name();
  ctx.report.args = args;
  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    if (!f.scenario.empty()) {
      ctx.scenario = load_scenario(f.scenario);
      ctx.report.input_digest = content_digest(emit_scenario(*ctx.scenario));
    }
    ctx.report.seed = ctx.seed();
    if (ctx.has_out()) fs::create_directories(f.out);
    try {
      if (active == check) cmd_check_feas(ctx);
      else if (active == fixed) cmd_fixed_point(ctx);
      else if (active == solve) cmd_solve(ctx);
      else if (active == solve_mc_cmd) cmd_solve_mc(ctx);
      else if (active == sweep) cmd_sweep(ctx, budget_range, threads);
      else if (active == certify) cmd_certify(ctx, which, pairs);
      else if (active == oracle) cmd_oracle(ctx, resolution, rounds);
      else if (active == plot) cmd_plot(ctx, threads);
      else if (active == gen) cmd_generate(ctx, spec, noise_power, p_max);
    } catch (const ExitWith& e) {
      code = e.code;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const InvalidUtilityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const ConvergenceError& e) {
    err << "no convergence: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const DivergenceError& e) {
    err << "no convergence: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  ctx.report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const json report = to_json(ctx.report);
  if (ctx.has_out()) {
    write_text(ctx.out_path("report.json"), report.dump(2) + "\n");
    err << "wrote " << ctx.out_path("report.json").string() << "\n";
  } else if (active != gen) {
    out << report.dump(2) << "\n";
  }
  return code;
}

}  // namespace pwrctl
