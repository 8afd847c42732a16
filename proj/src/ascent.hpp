#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pwrctl/matrix.hpp"

namespace pwrctl::detail {

/// Smooth objective over a box, maximized by projected gradient ascent.
struct AscentProblem {
  Vector lo, hi;
  /// Returns the objective at y and writes its gradient. Non-finite values
  /// mark y as outside the objective's domain.
  std::function<double(std::span<const double> y, std::span<double> grad)> eval;
  /// Sum used for inner products; lets callers choose an order-independent reduction.
  std::function<double(std::span<const double>)> reduce;
};

struct AscentOptions {
  double tol = 1e-8;
  long max_iter = 50000;
  double initial_step = 1.0;
  double beta = 0.5;
  double armijo_c = 1e-4;
  /// Per-coordinate Barzilai-Borwein steps instead of one shared step. Helps
  /// when coordinates live on very different curvature scales.
  bool diagonal_steps = false;
  /// Relative objective drop accepted as rounding when the sufficient-increase
  /// test fails but the directional slope has not flipped. Zero keeps the
  /// recorded objective sequence nondecreasing.
  double flat_rel = 0.0;
  bool record_history = false;
};

struct AscentResult {
  Vector y;
  Vector grad;
  double value = 0.0;
  double stationarity = 0.0;
  long iterations = 0;
  bool converged = false;
  bool stalled = false;
  std::vector<double> history;
};

/// Boundary tolerance: a coordinate within this distance of a bound is active.
inline constexpr double kActiveTol = 1e-12;

/// KKT stationarity of a box-constrained maximization: |g_j| on free
/// coordinates, and only the inward-pointing part on active ones.
double box_stationarity(std::span<const double> y, std::span<const double> g, std::span<const double> lo,
                        std::span<const double> hi);

/// Projected gradient ascent with Barzilai-Borwein trial steps and Armijo
/// backtracking along the projection arc. The objective sequence is
/// nondecreasing up to floating-point noise.
AscentResult projected_ascent(const AscentProblem& problem, Vector y0, const AscentOptions& opts);

double plain_sum(std::span<const double> v);
/// Sum in ascending order of value; invariant under permutations of v.
double sorted_sum(std::span<const double> v);

}  // namespace pwrctl::detail
