#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pwrctl/fixedpoint.hpp"
#include "pwrctl/model.hpp"

namespace pwrctl {

/// Powers below this are clamped in log coordinates so the box stays compact.
inline constexpr double kMinLogPower = 1e-12;

/// Log-domain coordinates y = ln p, z = ln gamma, with their boxes.
struct LogVars {
  Vector y;
  Vector z;
  Vector y_min, y_max;  ///< y_min = ln max(p_min, kMinLogPower), y_max = ln p_max
  Vector z_min, z_max;  ///< ln gamma_min (-inf when 0), ln gamma_max (+inf when absent)
};

/// Throws DomainError for a zero power (no log coordinate).
LogVars to_log(const NetworkModel& model, std::span<const double> p);
PowerVector from_log(std::span<const double> y);

/// z_i = ln h_ii + y_i - ln(sum_{k != i} h_ki e^{y_k} + n_i)
Vector log_sinr(const NetworkModel& model, std::span<const double> y);

struct ObjectiveGradient {
  double value = 0.0;
  Vector grad;
};

/// F(y) = sum_i u_i(e^{z_i(y)}) and its analytic gradient
/// dF/dy_j = u_j'(g_j) g_j - sum_{i != j} u_i'(g_i) g_i h_ji e^{y_j} / q_i.
ObjectiveGradient objective_and_gradient(const NetworkModel& model, const UtilitySpec& u, std::span<const double> y);

/// Lagrange multipliers of the log-domain problem.
struct Multipliers {
  Vector lambda_l;  ///< z_i >= ln gamma_min_i
  Vector lambda_u;  ///< z_i <= ln gamma_max_i
  Vector mu;        ///< y_i <= y_max_i
  Vector nu;        ///< y_i >= y_min_i

  static Multipliers zeros(std::size_t n) { return {Vector(n), Vector(n), Vector(n), Vector(n)}; }
};

struct KktResiduals {
  double stationarity_inf_norm = 0.0;
  double primal_violation = 0.0;
  double comp_slack_max = 0.0;
};

/// Residuals of grad F + sum_i (lambda_l_i - lambda_u_i) grad z_i - mu + nu = 0,
/// of the bounds, and of complementary slackness.
KktResiduals kkt_residual(const NetworkModel& model, const UtilitySpec& u, std::span<const double> y,
                          const Multipliers& m);

enum class SolveStatus { Converged, MaxIterations, Stalled, Infeasible, Oscillating };
const char* to_string(SolveStatus s);

struct LogSolution {
  LogVars vars;
  PowerVector p;  ///< e^{y*}
  Multipliers multipliers;
  KktResiduals kkt;
  double objective = 0.0;
  long iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  std::string diagnostic;
  /// Objective per iteration when requested.
  std::vector<double> history;
};

struct G2offConfig {
  double initial_step = 1.0;
  double beta = 0.5;
  double armijo_c = 1e-4;
  double tol = 1e-8;
  long max_iter = 50000;
  bool allow_nonconcave = false;
  bool record_history = false;
};

/// Throws InvalidUtilityError unless every link's utility passes the
/// log-concavity certificate (relative risk aversion >= 1 on [1e-4, 1e4]).
void require_log_concave(const UtilitySpec& u, std::size_t num_links);

/// Centralized solver: projected gradient ascent on y over the power box.
/// SINR bounds are handled by an augmented-Lagrangian penalty whose weight
/// doubles from 1 (capped at 1e8) until they hold to tol.
LogSolution solve_g2off(const NetworkModel& model, const UtilitySpec& u, const G2offConfig& config = {});

struct G2tooConfig {
  /// Per-link step is step_scale / L_j, L_j from a gradient-difference probe.
  double step_scale = 0.1;
  int probe_samples = 10;
  AsyncSchedule schedule{};
  /// Bound b of the zero-mean uniform relative noise on measured SINRs and prices.
  double measurement_noise = 0.0;
  double tol = 1e-8;
  long max_iter = 2'000'000;
  /// Abort after this many consecutive activations with falling objective.
  long oscillation_window = 1000;
  bool allow_nonconcave = false;
  bool record_history = false;
};

/// Distributed solver: each receiver announces the interference price
/// pi_i = u_i'(gamma_i) gamma_i / q_i; transmitter j climbs
/// u_j'(gamma_j) gamma_j - e^{y_j} sum_{i != j} pi_i h_ji with a fixed step,
/// under the seeded asynchronous schedule.
LogSolution solve_g2too(const NetworkModel& model, const UtilitySpec& u, const G2tooConfig& config = {});

/// CSV with columns iter, objective.
void write_history_csv(std::ostream& os, const std::vector<double>& history);

}  // namespace pwrctl
