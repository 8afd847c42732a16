#pragma once

#include <cstddef>
#include <limits>
#include <span>

#include "pwrctl/matrix.hpp"
#include "pwrctl/utility.hpp"

namespace pwrctl {

using PowerVector = Vector;  ///< transmit powers, W
using SinrVector = Vector;   ///< linear SINR

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Single-carrier interference network of transmitter/receiver pairs.
///
/// Gain orientation: gain(k, i) is the linear power gain from transmitter k to
/// receiver i, so receiver i hears sum_k gain(k, i) p_k. The diagonal holds the
/// direct-link gains.
class NetworkModel {
 public:
  /// Limits left empty default to p_min = 0, p_max = +inf, gamma_min = 0,
  /// gamma_max = +inf. Throws ModelError on any invariant violation.
  NetworkModel(Matrix gain, Vector noise, Vector p_min = {}, Vector p_max = {}, Vector gamma_min = {},
               Vector gamma_max = {});

  std::size_t num_links() const { return noise_.size(); }

  const Matrix& gain() const { return gain_; }
  double gain(std::size_t tx, std::size_t rx) const { return gain_(tx, rx); }
  double direct(std::size_t i) const { return gain_(i, i); }

  /// Receiver-major cross gains with zero diagonal: rx_cross()(i, k) = gain(k, i), k != i.
  const Matrix& rx_cross() const { return rx_cross_; }
  /// Transmitter-major cross gains with zero diagonal: tx_cross()(j, i) = gain(j, i), j != i.
  const Matrix& tx_cross() const { return tx_cross_; }
  bool decoupled() const { return decoupled_; }

  const Vector& noise() const { return noise_; }
  const Vector& p_min() const { return p_min_; }
  const Vector& p_max() const { return p_max_; }
  const Vector& gamma_min() const { return gamma_min_; }
  const Vector& gamma_max() const { return gamma_max_; }

  bool has_sinr_bounds() const;

  /// Same network with replaced limits (empty keeps the current value).
  NetworkModel with_limits(Vector p_min, Vector p_max, Vector gamma_min = {}, Vector gamma_max = {}) const;

  bool operator==(const NetworkModel& other) const;

 private:
  Matrix gain_;
  Matrix rx_cross_;
  Matrix tx_cross_;
  Vector noise_;
  Vector p_min_, p_max_, gamma_min_, gamma_max_;
  bool decoupled_ = true;
};

/// Throws ModelError on length mismatch and DomainError on negative or non-finite entries.
void check_power(const NetworkModel& model, std::span<const double> p);

/// q_i = sum_{k != i} h_ki p_k + n_i
Vector interference(const NetworkModel& model, std::span<const double> p);

/// gamma_i = h_ii p_i / q_i; exactly 0 for a silent link.
SinrVector sinr(const NetworkModel& model, std::span<const double> p);

/// SINR given a precomputed interference vector.
SinrVector sinr_from(const NetworkModel& model, std::span<const double> p, std::span<const double> q);

/// sum_i u_i(gamma_i(p)). Throws DomainError naming the link when gamma_i = 0
/// under a utility that needs gamma > 0.
double total_utility(const NetworkModel& model, std::span<const double> p, const UtilitySpec& u);

/// Sum of utilities at given SINRs.
double total_utility_at(std::span<const double> gamma, const UtilitySpec& u);

}  // namespace pwrctl
