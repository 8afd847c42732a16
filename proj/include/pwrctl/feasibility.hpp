#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pwrctl/model.hpp"

namespace pwrctl {

/// Normalized gains for a set of SINR targets.
/// A(i, k) = gamma_i h_ki / h_ii for k != i (zero diagonal), D = diag(gamma_i / h_ii), eta = D n.
struct NormalizedGainMatrix {
  Matrix a;
  Vector d;    ///< diagonal of D
  Vector eta;  ///< effective noise, W
};

NormalizedGainMatrix build_normalized(const NetworkModel& model, std::span<const double> gamma_target);

/// Perron root of a nonnegative square matrix by power iteration from the
/// all-ones vector. Falls back to a diagonally shifted iteration when the
/// plain one cycles (periodic matrices). Throws ConvergenceError after
/// `max_iter` total iterations.
double spectral_radius(const Matrix& a, double tol = 1e-10, int max_iter = 10000);

enum class FeasibilityStatus { Feasible, InfeasibleSpectral, InfeasibleBounds };

const char* to_string(FeasibilityStatus s);

struct BoundViolation {
  enum class Kind { AboveMax, BelowMin };
  std::size_t link;
  Kind kind;
  double value;
  double bound;
};

struct FeasibilityVerdict {
  double rho = 0.0;
  FeasibilityStatus status = FeasibilityStatus::InfeasibleSpectral;
  /// Minimal power meeting every target; present whenever rho < 1.
  std::optional<PowerVector> p_star;
  std::vector<BoundViolation> bound_violations;
};

/// Solves p = A p + eta for rho(A) < 1 via the Neumann iteration p <- A p + eta.
PowerVector minimal_power(const NormalizedGainMatrix& normalized);

FeasibilityVerdict check_feasibility(const NetworkModel& model, std::span<const double> gamma_target);

/// Largest s such that s * gamma_target is spectrally feasible (rho = 1 at s).
/// +inf for a decoupled network.
double max_uniform_scaling(const NetworkModel& model, std::span<const double> gamma_target);

}  // namespace pwrctl
