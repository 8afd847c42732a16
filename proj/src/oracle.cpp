#include "pwrctl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pwrctl/error.hpp"

namespace pwrctl {

OracleResult oracle_gridsearch(const NetworkModel& model, const UtilitySpec& u, int resolution, int refine_rounds) {
  const std::size_t n = model.num_links();
  if (n > 3) throw DomainError("oracle_gridsearch handles at most 3 links, got " + std::to_string(n));
  if (resolution < 2) throw DomainError("oracle_gridsearch needs resolution >= 2");
  if (refine_rounds < 0) throw DomainError("oracle_gridsearch needs refine_rounds >= 0");
  u.check_size(n);

  Vector lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pmax = model.p_max()[i];
    if (!std::isfinite(pmax)) throw DomainError("oracle_gridsearch needs a finite p_max", i);
    hi[i] = std::log(pmax);
    lo[i] = std::log(std::max(model.p_min()[i], 1e-3 * pmax));
  }
  const auto gmin = model.gamma_min();
  const auto gmax = model.gamma_max();

  OracleResult best;
  best.objective = -kInf;
  Vector wlo = lo, whi = hi;
  Vector p(n);
  std::vector<int> idx(n);

  for (int round = 0; round <= refine_rounds; ++round) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(idx[i]) / (resolution - 1);
        // Endpoints land exactly on the window edges.
        p[i] = idx[i] == resolution - 1 ? std::exp(whi[i]) : std::exp(wlo[i] + t * (whi[i] - wlo[i]));
      }
      const SinrVector g = sinr(model, p);
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) ok = g[i] >= gmin[i] && g[i] <= gmax[i];
      if (ok) {
        const double f = total_utility_at(g, u);
        ++best.evaluations;
        if (f > best.objective) {
          best.objective = f;
          best.p_best = p;
        }
      }
      std::size_t k = 0;
      while (k < n && ++idx[k] == resolution) idx[k++] = 0;
      if (k == n) break;
    }
    if (best.p_best.empty()) break;
    for (std::size_t i = 0; i < n; ++i) {
      const double width = 0.2 * (whi[i] - wlo[i]);
      const double c = std::log(best.p_best[i]);
      double a = c - 0.5 * width, b = c + 0.5 * width;
      if (a < lo[i]) {
        b += lo[i] - a;
        a = lo[i];
      }
      if (b > hi[i]) {
        a -= b - hi[i];
        b = hi[i];
      }
      wlo[i] = a;
      whi[i] = b;
    }
  }
  if (best.p_best.empty()) throw InfeasibleError("oracle_gridsearch: no grid point satisfies the SINR bounds");
  return best;
}

}  // namespace pwrctl
