#include "pwrctl/logopt.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ascent.hpp"
#include "logopt_detail.hpp"
#include "pwrctl/error.hpp"
#include "pwrctl/kernels.hpp"

namespace pwrctl {

namespace detail {

LinkState link_state(const NetworkModel& model, std::span<const double> y) {
  const std::size_t n = model.num_links();
  if (y.size() != n) throw ModelError("log-power vector has wrong length");
  LinkState s{Vector(n), Vector(n), Vector(n)};
  for (std::size_t i = 0; i < n; ++i) s.p[i] = std::exp(y[i]);
  kernels::gemv(model.rx_cross().data(), n, n, s.p.data(), model.noise().data(), s.q.data());
  for (std::size_t i = 0; i < n; ++i) s.gamma[i] = model.direct(i) * s.p[i] / s.q[i];
  return s;
}

void weighted_gradient(const NetworkModel& model, const LinkState& s, std::span<const double> a,
                       std::span<double> grad) {
  const std::size_t n = model.num_links();
  Vector price(n);
  for (std::size_t i = 0; i < n; ++i) price[i] = a[i] / s.q[i];
  kernels::gemv(model.tx_cross().data(), n, n, price.data(), nullptr, grad.data());
  for (std::size_t j = 0; j < n; ++j) grad[j] = a[j] - s.p[j] * grad[j];
}

Vector log_bound(std::span<const double> v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::log(v[i]);  // log(0) = -inf, log(inf) = inf
  return out;
}

void log_box(const NetworkModel& model, Vector& lo, Vector& hi) {
  const std::size_t n = model.num_links();
  lo.resize(n);
  hi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pmax = model.p_max()[i];
    if (!std::isfinite(pmax) || !(pmax >= kMinLogPower))
      throw DomainError("log-domain solvers need a finite power cap >= 1e-12 W", i);
    lo[i] = std::log(std::max(model.p_min()[i], kMinLogPower));
    hi[i] = std::log(pmax);
  }
}

}  // namespace detail

using detail::LinkState;

LogVars to_log(const NetworkModel& model, std::span<const double> p) {
  check_power(model, p);
  const std::size_t n = model.num_links();
  LogVars v;
  v.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p[i] > 0.0)) throw DomainError("zero power has no log coordinate", i);
    v.y[i] = std::log(p[i]);
  }
  v.z = log_sinr(model, v.y);
  v.y_min.resize(n);
  v.y_max = detail::log_bound(model.p_max());
  for (std::size_t i = 0; i < n; ++i) v.y_min[i] = std::log(std::max(model.p_min()[i], kMinLogPower));
  v.z_min = detail::log_bound(model.gamma_min());
  v.z_max = detail::log_bound(model.gamma_max());
  return v;
}

PowerVector from_log(std::span<const double> y) {
  PowerVector p(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) p[i] = std::exp(y[i]);
  return p;
}

Vector log_sinr(const NetworkModel& model, std::span<const double> y) {
  const std::size_t n = model.num_links();
  if (y.size() != n) throw ModelError("log-power vector has wrong length");
  const PowerVector p = from_log(y);
  Vector q(n);
  kernels::gemv(model.rx_cross().data(), n, n, p.data(), model.noise().data(), q.data());
  Vector z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::log(model.direct(i)) + y[i] - std::log(q[i]);
  return z;
}

ObjectiveGradient objective_and_gradient(const NetworkModel& model, const UtilitySpec& u, std::span<const double> y) {
  u.check_size(model.num_links());
  const std::size_t n = model.num_links();
  const LinkState s = detail::link_state(model, y);
  ObjectiveGradient out{0.0, Vector(n)};
  Vector a(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Utility& ui = u.at(i);
    if (ui.needs_positive_sinr() && !(s.gamma[i] > 0.0))
      throw DomainError("utility '" + ui.label() + "' undefined at zero SINR", i);
    out.value += ui.value(s.gamma[i]);
    a[i] = ui.d1(s.gamma[i]) * s.gamma[i];
  }
  detail::weighted_gradient(model, s, a, out.grad);
  return out;
}

KktResiduals kkt_residual(const NetworkModel& model, const UtilitySpec& u, std::span<const double> y,
                          const Multipliers& m) {
  const std::size_t n = model.num_links();
  const LinkState s = detail::link_state(model, y);
  Vector a(n), grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Utility& ui = u.at(i);
    a[i] = ui.d1(s.gamma[i]) * s.gamma[i] + m.lambda_l[i] - m.lambda_u[i];
  }
  detail::weighted_gradient(model, s, a, grad);

  Vector lo, hi;
  detail::log_box(model, lo, hi);
  const Vector z_min = detail::log_bound(model.gamma_min());
  const Vector z_max = detail::log_bound(model.gamma_max());

  // A zero multiplier on an absent (infinite) bound contributes nothing.
  auto slack = [](double mult, double gap) { return mult == 0.0 ? 0.0 : mult * std::fabs(gap); };

  KktResiduals r;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = std::log(s.gamma[i]);
    const double st = std::fabs(grad[i] - m.mu[i] + m.nu[i]);
    r.stationarity_inf_norm = std::max(r.stationarity_inf_norm, st);
    r.primal_violation = std::max({r.primal_violation, z_min[i] - z, z - z_max[i], y[i] - hi[i], lo[i] - y[i],
                                   -m.lambda_l[i], -m.lambda_u[i], -m.mu[i], -m.nu[i]});
    r.comp_slack_max = std::max({r.comp_slack_max, slack(m.lambda_l[i], z - z_min[i]),
                                 slack(m.lambda_u[i], z_max[i] - z), slack(m.mu[i], hi[i] - y[i]),
                                 slack(m.nu[i], y[i] - lo[i])});
  }
  return r;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::MaxIterations:
      return "max_iterations";
    case SolveStatus::Stalled:
      return "stalled";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Oscillating:
      return "oscillating";
  }
  return "unknown";
}

void require_log_concave(const UtilitySpec& u, std::size_t num_links) {
  u.check_size(num_links);
  for (std::size_t i = 0; i < (u.uniform() ? 1 : num_links); ++i) {
    if (auto bad = log_concavity_violation(u.at(i)))
      throw InvalidUtilityError("utility '" + u.at(i).label() + "' of link " + std::to_string(i) +
                                " fails the log-concavity certificate (relative risk aversion < 1 at gamma = " +
                                std::to_string(*bad) + "); pass allow_nonconcave to override");
  }
}

namespace detail {

Multipliers recover_multipliers(std::span<const double> y, std::span<const double> lagrangian_grad,
                                std::span<const double> lo, std::span<const double> hi, Vector lambda_l,
                                Vector lambda_u) {
  const std::size_t n = y.size();
  Multipliers m{std::move(lambda_l), std::move(lambda_u), Vector(n), Vector(n)};
  for (std::size_t j = 0; j < n; ++j) {
    if (hi[j] - y[j] <= kActiveTol && lagrangian_grad[j] > 0.0) m.mu[j] = lagrangian_grad[j];
    if (y[j] - lo[j] <= kActiveTol && lagrangian_grad[j] < 0.0) m.nu[j] = -lagrangian_grad[j];
  }
  return m;
}

}  // namespace detail

LogSolution solve_g2off(const NetworkModel& model, const UtilitySpec& u, const G2offConfig& cfg) {
  const std::size_t n = model.num_links();
  u.check_size(n);
  if (!cfg.allow_nonconcave) require_log_concave(u, n);

  detail::AscentProblem pb;
  detail::log_box(model, pb.lo, pb.hi);
  const Vector z_min = detail::log_bound(model.gamma_min());
  const Vector z_max = detail::log_bound(model.gamma_max());
  const bool bounded = model.has_sinr_bounds();

  // Augmented-Lagrangian state for the SINR bounds.
  Vector lam_l(n, 0.0), lam_u(n, 0.0);
  double rho = 1.0;
  constexpr double kMaxWeight = 1e8;

  // Penalty-shifted multipliers max(0, lambda + rho c) at a point.
  auto shifted = [&](std::span<const double> z, Vector& l_out, Vector& u_out) {
    for (std::size_t i = 0; i < n; ++i) {
      l_out[i] = std::isfinite(z_min[i]) ? std::max(0.0, lam_l[i] + rho * (z_min[i] - z[i])) : 0.0;
      u_out[i] = std::isfinite(z_max[i]) ? std::max(0.0, lam_u[i] + rho * (z[i] - z_max[i])) : 0.0;
    }
  };

  pb.eval = [&](std::span<const double> y, std::span<double> grad) -> double {
    const LinkState s = detail::link_state(model, y);
    Vector a(n), z(n), sl(n), su(n);
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Utility& ui = u.at(i);
      value += ui.value(s.gamma[i]);
      a[i] = ui.d1(s.gamma[i]) * s.gamma[i];
    }
    if (bounded) {
      for (std::size_t i = 0; i < n; ++i) z[i] = std::log(s.gamma[i]);
      shifted(z, sl, su);
      for (std::size_t i = 0; i < n; ++i) {
        value -= (sl[i] * sl[i] - lam_l[i] * lam_l[i] + su[i] * su[i] - lam_u[i] * lam_u[i]) / (2.0 * rho);
        a[i] += sl[i] - su[i];
      }
    }
    detail::weighted_gradient(model, s, a, grad);
    if (!std::isfinite(value)) return -kInf;
    return value;
  };

  detail::AscentOptions opts;
  opts.tol = cfg.tol;
  opts.initial_step = cfg.initial_step;
  opts.beta = cfg.beta;
  opts.armijo_c = cfg.armijo_c;
  opts.record_history = cfg.record_history;

  LogSolution sol;
  Vector y = pb.hi;  // start at full power
  long used = 0;
  double prev_violation = kInf;
  Vector sl(n, 0.0), su(n, 0.0);
  detail::AscentResult res;
  for (;;) {
    opts.max_iter = std::max(0L, cfg.max_iter - used);
    res = detail::projected_ascent(pb, y, opts);
    used += res.iterations;
    y = res.y;
    sol.history.insert(sol.history.end(), res.history.begin(), res.history.end());

    const Vector z = log_sinr(model, y);
    double violation = 0.0;
    for (std::size_t i = 0; i < n; ++i) violation = std::max({violation, z_min[i] - z[i], z[i] - z_max[i]});
    shifted(z, sl, su);
    if (!res.converged) {
      sol.status = res.stalled ? SolveStatus::Stalled : SolveStatus::MaxIterations;
      break;
    }
    if (violation <= cfg.tol) {
      sol.status = SolveStatus::Converged;
      break;
    }
    lam_l = sl;
    lam_u = su;
    if (violation > 0.25 * prev_violation) rho *= 2.0;
    prev_violation = violation;
    if (rho > kMaxWeight) {
      sol.status = SolveStatus::Infeasible;
      sol.diagnostic = "SINR bounds unattainable: penalty weight exhausted with violation " + std::to_string(violation);
      break;
    }
  }

  sol.iterations = used;
  sol.vars = to_log(model, from_log(y));
  sol.p = from_log(y);
  sol.objective = total_utility(model, sol.p, u);
  sol.multipliers = detail::recover_multipliers(y, res.grad, pb.lo, pb.hi, sl, su);
  sol.kkt = kkt_residual(model, u, y, sol.multipliers);
  sol.converged = sol.status == SolveStatus::Converged && sol.kkt.stationarity_inf_norm <= cfg.tol &&
                  sol.kkt.primal_violation <= cfg.tol;
  if (sol.status == SolveStatus::Converged && !sol.converged) sol.status = SolveStatus::Stalled;
  if (sol.status == SolveStatus::MaxIterations && sol.diagnostic.empty())
    sol.diagnostic = "iteration budget exhausted; returning best iterate";
  return sol;
}

void write_history_csv(std::ostream& os, const std::vector<double>& history) {
  os << "iter,objective\n";
  const auto old = os.precision(17);
  for (std::size_t k = 0; k < history.size(); ++k) os << k << ',' << history[k] << '\n';
  os.precision(old);
}

}  // namespace pwrctl
