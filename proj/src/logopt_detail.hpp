#pragma once

#include <span>

#include "pwrctl/logopt.hpp"

namespace pwrctl::detail {

/// Powers, interference and SINR at a log-power point.
struct LinkState {
  Vector p, q, gamma;
};

LinkState link_state(const NetworkModel& model, std::span<const double> y);

/// grad_j = a_j - p_j sum_{i != j} h_ji a_i / q_i, i.e. sum_i a_i grad z_i.
void weighted_gradient(const NetworkModel& model, const LinkState& s, std::span<const double> a,
                       std::span<double> grad);

/// y box of a model; throws DomainError when a power cap is not finite and positive.
void log_box(const NetworkModel& model, Vector& lo, Vector& hi);

Vector log_bound(std::span<const double> v);

/// Multipliers recovered at y from the Lagrangian gradient: SINR-bound
/// multipliers are passed through, box multipliers come from projection activity.
Multipliers recover_multipliers(std::span<const double> y, std::span<const double> lagrangian_grad,
                                std::span<const double> lo, std::span<const double> hi, Vector lambda_l,
                                Vector lambda_u);

}  // namespace pwrctl::detail
