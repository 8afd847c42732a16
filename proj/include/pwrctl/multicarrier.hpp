#pragma once

#include <span>
#include <string>
#include <vector>

#include "pwrctl/feasibility.hpp"
#include "pwrctl/logopt.hpp"
#include "pwrctl/model.hpp"

namespace pwrctl {

/// Rows are links, columns are carriers.
using PowerMatrix = Matrix;
using SinrMatrix = Matrix;

/// Links sharing F orthogonal carriers. Each carrier is a full single-carrier
/// network whose p_max is the per-carrier cap; links also have a total budget
/// across carriers.
class MultiCarrierModel {
 public:
  /// `carriers[f]` holds gains h_ki,f, noise n_i,f and caps p_i,f^max of carrier f.
  /// Empty `u_min` / `v_max` mean no QoS floor / no utility ceiling.
  MultiCarrierModel(std::vector<NetworkModel> carriers, Vector p_budget, Vector u_min = {}, Vector v_max = {});

  std::size_t num_links() const { return carriers_.front().num_links(); }
  std::size_t num_carriers() const { return carriers_.size(); }

  const NetworkModel& carrier(std::size_t f) const { return carriers_.at(f); }
  const std::vector<NetworkModel>& carriers() const { return carriers_; }
  const Vector& p_budget() const { return p_budget_; }
  const Vector& u_min() const { return u_min_; }
  const Vector& v_max() const { return v_max_; }
  bool has_qos_floor() const;
  bool has_utility_ceiling() const;

  /// Same model with carriers reordered: result carrier f is carrier perm[f].
  MultiCarrierModel permuted(std::span<const std::size_t> perm) const;

 private:
  std::vector<NetworkModel> carriers_;
  Vector p_budget_, u_min_, v_max_;
};

/// Objective utilities V_i,f and QoS utilities U_i,f. One entry applies to every carrier.
struct CarrierUtilitySplit {
  std::vector<UtilitySpec> objective{UtilitySpec(Utility::log())};
  std::vector<UtilitySpec> qos{UtilitySpec(Utility::rate())};

  const Utility& v(std::size_t link, std::size_t carrier) const;
  const Utility& u(std::size_t link, std::size_t carrier) const;
  void check_size(std::size_t num_links, std::size_t num_carriers) const;
};

/// Per-carrier SINR; column f equals sinr(carrier(f), P column f) bitwise.
SinrMatrix sinr_mc(const MultiCarrierModel& model, const PowerMatrix& p);

struct McFeasibility {
  std::vector<FeasibilityVerdict> per_carrier;
  /// Links with sum_f p_star > budget; only evaluated when every carrier has p_star.
  std::vector<std::size_t> budget_violations;
  bool budget_evaluated = false;
};

/// Targets of zero mark a link as silent on that carrier.
McFeasibility feasibility_mc(const MultiCarrierModel& model, const Matrix& gamma_target);

struct BudgetUsage {
  double used = 0.0;
  double budget = 0.0;
  double slack = 0.0;
};

std::vector<BudgetUsage> budget_check(const MultiCarrierModel& model, const PowerMatrix& p);

enum class QosMode { PerLink, PerCarrier };

struct McConfig {
  double tol = 1e-8;
  long max_iter = 5'000'000;   ///< total inner gradient iterations
  long max_dual_iter = 200'000;
  double dual_step = 0.01;     ///< initial budget-dual step
  QosMode qos_mode = QosMode::PerLink;
  double saturation_band = 1e-3;
  bool allow_nonconcave = false;
};

struct McResiduals {
  double stationarity_inf_norm = 0.0;
  double budget_violation = 0.0;
  double qos_violation = 0.0;
  double comp_slack_max = 0.0;
};

struct McSolution {
  PowerMatrix p;
  Vector budget_dual;  ///< mu_i
  Matrix qos_dual;     ///< per link (one column) or per link and carrier
  McResiduals residuals;
  double objective = 0.0;
  long iterations = 0;
  long dual_iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  std::string diagnostic;
};

/// Maximizes sum_i,f V_i,f(gamma_i,f) subject to per-link budgets, per-carrier
/// caps and optional QoS floors. Projected gradient in y_i,f = ln p_i,f; budget
/// duals by projected subgradient ascent; QoS floors by augmented Lagrangian.
McSolution solve_mc(const MultiCarrierModel& model, const CarrierUtilitySplit& split, const McConfig& config = {});

}  // namespace pwrctl
