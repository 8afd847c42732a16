#pragma once

#include "pwrctl/model.hpp"

namespace pwrctl {

struct OracleResult {
  PowerVector p_best;
  double objective = 0.0;
  long evaluations = 0;
};

/// Brute-force maximizer of sum_i u_i(gamma_i) for at most three links.
/// Log-spaced grid over [max(p_min, 1e-3 p_max), p_max] per axis, then
/// `refine_rounds` regrids on a window 0.2x as wide around the incumbent.
/// Points violating an SINR bound are skipped. Throws DomainError for n > 3
/// or an unbounded p_max.
OracleResult oracle_gridsearch(const NetworkModel& model, const UtilitySpec& u, int resolution = 41,
                               int refine_rounds = 4);

}  // namespace pwrctl
