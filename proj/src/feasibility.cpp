#include "pwrctl/feasibility.hpp"

#include <cmath>
#include <string>

#include "pwrctl/error.hpp"
#include "pwrctl/kernels.hpp"

namespace pwrctl {

namespace {

constexpr double kBoundSlack = 1e-12;
constexpr long kNeumannMaxIter = 1'000'000;

void check_targets(const NetworkModel& model, std::span<const double> gamma_target) {
  if (gamma_target.size() != model.num_links()) throw ModelError("SINR target vector has wrong length");
  for (std::size_t i = 0; i < gamma_target.size(); ++i)
    if (!(gamma_target[i] > 0.0) || !std::isfinite(gamma_target[i]))
      throw DomainError("SINR target must be positive and finite", i);
}

// Gaussian elimination with partial pivoting on (I - A) p = eta.
PowerVector direct_solve(const NormalizedGainMatrix& nm) {
  const std::size_t n = nm.eta.size();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) m(i, k) = (i == k ? 1.0 : 0.0) - nm.a(i, k);
  Vector b = nm.eta;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(m(r, col)) > std::fabs(m(piv, col))) piv = r;
    if (m(piv, col) == 0.0) throw ConvergenceError("singular system in minimal power solve", 0.0);
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m(piv, c), m(col, c));
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m(r, col) / m(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) m(r, c) -= f * m(col, c);
      b[r] -= f * b[col];
    }
  }
  Vector p(n);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= m(r, c) * p[c];
    p[r] = acc / m(r, r);
  }
  return p;
}

}  // namespace

const char* to_string(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::Feasible:
      return "feasible";
    case FeasibilityStatus::InfeasibleSpectral:
      return "infeasible_spectral";
    case FeasibilityStatus::InfeasibleBounds:
      return "infeasible_bounds";
  }
  return "unknown";
}

NormalizedGainMatrix build_normalized(const NetworkModel& model, std::span<const double> gamma_target) {
  check_targets(model, gamma_target);
  const std::size_t n = model.num_links();
  NormalizedGainMatrix out{Matrix(n, n), Vector(n), Vector(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.d[i] = gamma_target[i] / model.direct(i);
    out.eta[i] = out.d[i] * model.noise()[i];
    for (std::size_t k = 0; k < n; ++k) out.a(i, k) = out.d[i] * model.rx_cross()(i, k);
  }
  return out;
}

double spectral_radius(const Matrix& a, double tol, int max_iter) {
  if (!a.square()) throw ModelError("spectral radius needs a square matrix");
  const std::size_t n = a.rows();
  if (n == 0) return 0.0;
  double row_max = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (double v : a.row(r)) {
      if (!(v >= 0.0)) throw DomainError("spectral radius needs a nonnegative matrix");
      s += v;
    }
    row_max = std::max(row_max, s);
  }
  if (row_max == 0.0) return 0.0;

  // Stall check: a cycling iteration keeps its residual; a slowly converging one still shrinks it.
  constexpr int kWindow = 500;
  constexpr double kStallRatio = 0.9;

  Vector x(n, 1.0), y(n);
  double best = 0.0;
  double best_res = kInf;
  double shift = 0.0;
  double window_res = kInf;
  int iter = 0;
  while (iter < max_iter) {
    kernels::gemv(a.data(), n, n, x.data(), nullptr, y.data());
    if (shift != 0.0) kernels::axpy(shift, x.data(), y.data(), n);
    const double scale = inf_norm(y);
    if (scale == 0.0) return 0.0;  // A^k 1 = 0: nilpotent
    const double xx = kernels::dot(x.data(), x.data(), n);
    const double shifted = kernels::dot(x.data(), y.data(), n) / xx;
    const double rho = shifted - shift;
    // ||(A + sI) x - rho_s x|| equals ||A x - rho x||
    double res_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) res_abs = std::max(res_abs, std::fabs(y[i] - shifted * x[i]));
    const double res = rho > 0.0 ? res_abs / (rho * inf_norm(x)) : kInf;
    if (res < best_res) {
      best_res = res;
      best = rho;
    }
    ++iter;
    if (res <= tol) return std::max(rho, 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / scale;

    if (iter % kWindow == 0) {
      if (shift == 0.0 && best_res > kStallRatio * window_res) shift = 0.5 * row_max;
      window_res = best_res;
    }
  }
  throw ConvergenceError("spectral radius: no convergence after " + std::to_string(max_iter) + " iterations", best);
}

PowerVector minimal_power(const NormalizedGainMatrix& nm) {
  const std::size_t n = nm.eta.size();
  const double stop = 1e-12 * inf_norm(nm.eta);
  Vector p = nm.eta, next(n);
  for (long it = 0; it < kNeumannMaxIter; ++it) {
    kernels::gemv(nm.a.data(), n, n, p.data(), nm.eta.data(), next.data());
    const double step = kernels::max_abs_diff(next.data(), p.data(), n);
    p.swap(next);
    if (!std::isfinite(step)) break;
    if (step <= stop) return p;
  }
  return direct_solve(nm);
}

FeasibilityVerdict check_feasibility(const NetworkModel& model, std::span<const double> gamma_target) {
  const NormalizedGainMatrix nm = build_normalized(model, gamma_target);
  FeasibilityVerdict v;
  v.rho = spectral_radius(nm.a);
  if (!(v.rho < 1.0)) {
    v.status = FeasibilityStatus::InfeasibleSpectral;
    return v;
  }
  v.p_star = minimal_power(nm);
  const PowerVector& p = *v.p_star;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > model.p_max()[i] * (1.0 + kBoundSlack))
      v.bound_violations.push_back({i, BoundViolation::Kind::AboveMax, p[i], model.p_max()[i]});
    else if (p[i] < model.p_min()[i] * (1.0 - kBoundSlack))
      v.bound_violations.push_back({i, BoundViolation::Kind::BelowMin, p[i], model.p_min()[i]});
  }
  v.status = v.bound_violations.empty() ? FeasibilityStatus::Feasible : FeasibilityStatus::InfeasibleBounds;
  return v;
}

double max_uniform_scaling(const NetworkModel& model, std::span<const double> gamma_target) {
  const double rho = spectral_radius(build_normalized(model, gamma_target).a);
  return rho == 0.0 ? kInf : 1.0 / rho;
}

}  // namespace pwrctl
