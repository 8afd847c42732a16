#pragma once

// Random instance builders and independent reference computations shared by
// the unit tests and the acceptance runner.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "pwrctl/feasibility.hpp"
#include "pwrctl/model.hpp"
#include "pwrctl/rng.hpp"
#include "pwrctl/utility.hpp"

namespace testsupport {

using pwrctl::Matrix;
using pwrctl::NetworkModel;
using pwrctl::Rng;
using pwrctl::Vector;

/// Direct gains in [0.5, 1.5], cross gains in [0, cross_hi], noise in [0.01, 0.1].
inline Matrix random_gains(Rng& rng, std::size_t n, double cross_hi = 0.3) {
  Matrix h(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) h(k, i) = k == i ? rng.uniform(0.5, 1.5) : rng.uniform(0.0, cross_hi);
  return h;
}

inline Vector random_vector(Rng& rng, std::size_t n, double lo, double hi) {
  Vector v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline NetworkModel random_model(Rng& rng, std::size_t n, double cross_hi = 0.3, double p_max = pwrctl::kInf) {
  Matrix h = random_gains(rng, n, cross_hi);
  Vector noise = random_vector(rng, n, 0.01, 0.1);
  Vector pmax = std::isfinite(p_max) ? Vector(n, p_max) : Vector{};
  return NetworkModel(h, noise, {}, pmax);
}

/// Dense A(i, k) = gamma_i h_ki / h_ii with zero diagonal, built from scratch.
inline Eigen::MatrixXd normalized_dense(const NetworkModel& m, const Vector& gamma) {
  const std::size_t n = m.num_links();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (k != i) a(i, k) = gamma[i] * m.gain(k, i) / m.direct(i);
  return a;
}

/// Largest eigenvalue modulus by a general eigen-decomposition.
inline double eigen_spectral_radius(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// (I - A)^-1 eta by LU decomposition.
inline Vector eigen_min_power(const NetworkModel& m, const Vector& gamma) {
  const std::size_t n = m.num_links();
  Eigen::MatrixXd a = normalized_dense(m, gamma);
  Eigen::VectorXd eta(n);
  for (std::size_t i = 0; i < n; ++i) eta(i) = gamma[i] * m.noise()[i] / m.direct(i);
  Eigen::VectorXd p = (Eigen::MatrixXd::Identity(n, n) - a).partialPivLu().solve(eta);
  return Vector(p.data(), p.data() + n);
}

/// Random targets scaled so that rho(A) equals `rho`.
inline Vector targets_with_radius(Rng& rng, const NetworkModel& m, double rho) {
  Vector g = random_vector(rng, m.num_links(), 0.2, 2.0);
  const double r = eigen_spectral_radius(normalized_dense(m, g));
  if (r > 0.0)
    for (double& x : g) x *= rho / r;
  return g;
}

/// Closed-form single-link waterfilling: max sum_f ln(1 + p_f / n_f) with
/// sum_f p_f <= budget and p_f <= cap_f. The level is found by bisection on
/// sum_f clamp(w - n_f, 0, cap_f) = budget.
inline Vector waterfill(const Vector& noise, const Vector& cap, double budget) {
  const std::size_t f = noise.size();
  auto alloc = [&](double w) {
    Vector p(f);
    for (std::size_t k = 0; k < f; ++k) p[k] = std::clamp(w - noise[k], 0.0, cap[k]);
    return p;
  };
  auto used = [&](double w) {
    Vector p = alloc(w);
    return std::accumulate(p.begin(), p.end(), 0.0);
  };
  const double full = std::accumulate(cap.begin(), cap.end(), 0.0);
  if (full <= budget) return cap;
  double lo = 0.0, hi = *std::max_element(noise.begin(), noise.end()) + budget + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (used(mid) < budget ? lo : hi) = mid;
  }
  return alloc(0.5 * (lo + hi));
}

inline double max_rel_diff(const Vector& a, const Vector& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
  return worst;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace testsupport

namespace testsupport {

struct RegressionCase {
  const char* name;
  NetworkModel model;
  pwrctl::UtilitySpec utility;
};

/// Fixed small networks used to compare the centralized and distributed solvers.
inline std::vector<RegressionCase> regression_set() {
  using pwrctl::Utility;
  std::vector<RegressionCase> out;
  out.push_back({"sym2-log", NetworkModel(Matrix{{1.0, 0.5}, {0.5, 1.0}}, {0.1, 0.1}, {}, {1.0, 1.0}), Utility::log()});
  out.push_back({"strong2-fair2", NetworkModel(Matrix{{1.0, 2.0}, {1.5, 1.0}}, {0.1, 0.05}, {}, {1.0, 1.0}),
                 Utility::alpha_fair(2.0)});
  out.push_back({"dense3-log",
                 NetworkModel(Matrix{{1.0, 1.5, 2.0}, {1.2, 0.8, 1.6}, {2.2, 1.4, 1.1}}, {0.01, 0.02, 0.01}, {},
                              {1.0, 2.0, 1.0}),
                 Utility::log()});
  out.push_back({"mixed3",
                 NetworkModel(Matrix{{1.0, 0.7, 0.9}, {0.6, 1.0, 0.8}, {0.9, 0.5, 1.0}}, {0.05, 0.05, 0.05}, {},
                              {1.0, 1.0, 1.0}),
                 pwrctl::UtilitySpec(std::vector<Utility>{Utility::log(), Utility::alpha_fair(2.0),
                                                          Utility::alpha_fair(1.5)})});
  out.push_back({"asym2-fair2", NetworkModel(Matrix{{1.0, 0.8}, {0.3, 0.6}}, {0.05, 0.1}, {}, {2.0, 1.0}),
                 Utility::alpha_fair(2.0)});
  out.push_back({"tri3-log",
                 NetworkModel(Matrix{{1.0, 0.9, 0.4}, {0.7, 1.2, 0.8}, {0.5, 0.6, 0.9}}, {0.1, 0.1, 0.1}, {},
                              {1.0, 1.0, 1.0}),
                 Utility::log()});
  out.push_back({"tri3-fair3",
                 NetworkModel(Matrix{{1.0, 0.3, 0.2}, {0.4, 1.0, 0.3}, {0.2, 0.5, 1.0}}, {0.02, 0.05, 0.03}, {},
                              {1.0, 0.5, 2.0}),
                 Utility::alpha_fair(3.0)});
  out.push_back({"quad4-log",
                 NetworkModel(Matrix{{1.0, 0.6, 0.3, 0.8},
                                     {0.5, 1.1, 0.7, 0.2},
                                     {0.9, 0.4, 0.8, 0.6},
                                     {0.3, 0.7, 0.5, 1.3}},
                              {0.05, 0.08, 0.1, 0.04}, {}, {1.0, 1.0, 1.0, 1.0}),
                 Utility::log()});
  return out;
}

}  // namespace testsupport
