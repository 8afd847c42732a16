#include <algorithm>
#include <cmath>
#include <deque>

#include "ascent.hpp"
#include "logopt_detail.hpp"
#include "pwrctl/error.hpp"
#include "pwrctl/logopt.hpp"
#include "pwrctl/rng.hpp"

namespace pwrctl {

namespace {

using detail::LinkState;

/// Transmitter side of a link. Sees only its own utility, its own gains
/// toward every receiver, and the prices those receivers announce.
class Transmitter {
 public:
  Transmitter(Utility u, Vector gains_to_receivers, std::size_t index, double lo, double hi, double step)
      : u_(std::move(u)), gains_(std::move(gains_to_receivers)), index_(index), lo_(lo), hi_(hi), step_(step) {}

  /// One gradient step given a (possibly stale, noisy) own-SINR measurement,
  /// the own receiver's dual weight and the announced prices.
  double step(double y, double gamma, double weight, std::span<const double> prices) const {
    double cost = 0.0;
    for (std::size_t i = 0; i < prices.size(); ++i)
      if (i != index_) cost += gains_[i] * prices[i];
    const double g = u_.d1(gamma) * gamma + weight - std::exp(y) * cost;
    return std::clamp(y + step_ * g, lo_, hi_);
  }

 private:
  Utility u_;
  Vector gains_;
  std::size_t index_;
  double lo_, hi_, step_;
};

/// Receiver side of a link: measures its SINR and interference, runs dual
/// ascent on its own SINR bounds, and announces the interference price.
class Receiver {
 public:
  Receiver(Utility u, double z_min, double z_max, double dual_step)
      : u_(std::move(u)), z_min_(z_min), z_max_(z_max), dual_step_(dual_step) {}

  double weight() const { return lambda_l_ - lambda_u_; }
  double lambda_l() const { return lambda_l_; }
  double lambda_u() const { return lambda_u_; }

  double price(double gamma, double q) const { return (u_.d1(gamma) * gamma + weight()) / q; }

  void update_duals(double gamma) {
    const double z = std::log(gamma);
    if (std::isfinite(z_min_)) lambda_l_ = std::max(0.0, lambda_l_ + dual_step_ * (z_min_ - z));
    if (std::isfinite(z_max_)) lambda_u_ = std::max(0.0, lambda_u_ + dual_step_ * (z - z_max_));
  }

 private:
  Utility u_;
  double z_min_, z_max_, dual_step_;
  double lambda_l_ = 0.0, lambda_u_ = 0.0;
};

struct Snapshot {
  Vector gamma;
  Vector price;
};

Vector gradient_of(const NetworkModel& model, const UtilitySpec& u, const LinkState& s, std::span<const double> w) {
  const std::size_t n = model.num_links();
  Vector a(n), g(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = u.at(i).d1(s.gamma[i]) * s.gamma[i] + w[i];
  detail::weighted_gradient(model, s, a, g);
  return g;
}

/// Per-link curvature bound from gradient differences at points below full power.
Vector probe_curvature(const NetworkModel& model, const UtilitySpec& u, const Vector& lo, const Vector& hi,
                       int samples, std::uint64_t seed) {
  constexpr double kProbeStep = 1e-4;
  constexpr double kFloor = 1e-9;
  const std::size_t n = model.num_links();
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const Vector zero(n, 0.0);
  Vector curv(n, kFloor), ys(n), yd(n);
  for (int s = 0; s < samples; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      ys[j] = std::clamp(hi[j] - rng.uniform(0.0, 2.0), lo[j], hi[j]);
      yd[j] = ys[j] + (rng.uniform() < 0.5 ? -kProbeStep : kProbeStep);
    }
    const Vector g0 = gradient_of(model, u, detail::link_state(model, ys), zero);
    const Vector g1 = gradient_of(model, u, detail::link_state(model, yd), zero);
    for (std::size_t j = 0; j < n; ++j) curv[j] = std::max(curv[j], std::fabs(g1[j] - g0[j]) / kProbeStep);
  }
  return curv;
}

}  // namespace

LogSolution solve_g2too(const NetworkModel& model, const UtilitySpec& u, const G2tooConfig& cfg) {
  const std::size_t n = model.num_links();
  u.check_size(n);
  if (!cfg.allow_nonconcave) require_log_concave(u, n);
  if (!(cfg.measurement_noise >= 0.0)) throw DomainError("measurement noise bound must be >= 0");
  if (cfg.schedule.staleness_bound < 0) throw DomainError("staleness bound must be >= 0");
  if (!(cfg.step_scale > 0.0)) throw DomainError("step scale must be positive");
  Vector prob = cfg.schedule.update_probability;
  if (prob.size() == 1) prob.assign(n, prob[0]);
  if (prob.size() != n) throw ModelError("update probability vector has wrong length");
  for (std::size_t i = 0; i < n; ++i)
    if (!(prob[i] > 0.0 && prob[i] <= 1.0)) throw DomainError("update probability must lie in (0, 1]", i);

  Vector lo, hi;
  detail::log_box(model, lo, hi);
  const Vector z_min = detail::log_bound(model.gamma_min());
  const Vector z_max = detail::log_bound(model.gamma_max());
  const Vector curv = probe_curvature(model, u, lo, hi, cfg.probe_samples, cfg.schedule.seed);

  std::vector<Transmitter> tx;
  std::vector<Receiver> rx;
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = model.tx_cross().row(j);
    const double step = cfg.step_scale / curv[j];
    tx.emplace_back(u.at(j), Vector(row.begin(), row.end()), j, lo[j], hi[j], step);
    rx.emplace_back(u.at(j), z_min[j], z_max[j], step);
  }

  Rng rng(cfg.schedule.seed);
  const double b = cfg.measurement_noise;
  auto noisy = [&](double v) { return b > 0.0 ? v * (1.0 + rng.uniform(-b, b)) : v; };
  const auto depth = static_cast<std::size_t>(cfg.schedule.staleness_bound);

  Vector y = hi;
  LinkState state = detail::link_state(model, y);
  auto snapshot = [&]() {
    Snapshot s{state.gamma, Vector(n)};
    for (std::size_t i = 0; i < n; ++i) s.price[i] = rx[i].price(state.gamma[i], state.q[i]);
    return s;
  };
  std::deque<Snapshot> history;
  history.push_front(snapshot());

  LogSolution sol;
  sol.status = SolveStatus::MaxIterations;
  Vector w(n), next(n), prices(n);
  double prev_objective = -kInf;
  long falling = 0;
  long it = 0;
  for (;; ++it) {
    for (std::size_t i = 0; i < n; ++i) w[i] = rx[i].weight();
    const Vector g = gradient_of(model, u, state, w);
    const double objective = total_utility_at(state.gamma, u);
    if (cfg.record_history) sol.history.push_back(objective);
    double violation = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = std::log(state.gamma[i]);
      violation = std::max({violation, z_min[i] - z, z - z_max[i]});
    }
    if (detail::box_stationarity(y, g, lo, hi) <= cfg.tol && violation <= cfg.tol) {
      sol.status = SolveStatus::Converged;
      break;
    }
    falling = objective < prev_objective ? falling + 1 : 0;
    prev_objective = objective;
    if (falling > cfg.oscillation_window) {
      sol.status = SolveStatus::Oscillating;
      sol.diagnostic = "objective fell for " + std::to_string(falling) + " consecutive activations; step too large";
      break;
    }
    if (it >= cfg.max_iter) break;

    const std::uint64_t max_delay = std::min<std::uint64_t>(depth, history.size() - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (!rng.bernoulli(prob[j])) {
        next[j] = y[j];
        continue;
      }
      const double gamma = noisy(history[rng.below_or_equal(max_delay)].gamma[j]);
      for (std::size_t i = 0; i < n; ++i)
        prices[i] = i == j ? 0.0 : noisy(history[rng.below_or_equal(max_delay)].price[i]);
      next[j] = tx[j].step(y[j], gamma, w[j], prices);
    }
    y = next;
    state = detail::link_state(model, y);
    for (std::size_t i = 0; i < n; ++i) rx[i].update_duals(state.gamma[i]);
    history.push_front(snapshot());
    if (history.size() > depth + 1) history.pop_back();
  }

  Vector lam_l(n), lam_u(n);
  for (std::size_t i = 0; i < n; ++i) {
    lam_l[i] = rx[i].lambda_l();
    lam_u[i] = rx[i].lambda_u();
    w[i] = rx[i].weight();
  }
  const Vector g = gradient_of(model, u, state, w);
  sol.iterations = it;
  sol.p = state.p;
  sol.vars = to_log(model, sol.p);
  sol.objective = total_utility_at(state.gamma, u);
  sol.multipliers = detail::recover_multipliers(y, g, lo, hi, std::move(lam_l), std::move(lam_u));
  sol.kkt = kkt_residual(model, u, y, sol.multipliers);
  sol.converged = sol.status == SolveStatus::Converged;
  if (sol.status == SolveStatus::MaxIterations)
    sol.diagnostic = b > 0.0 ? "noisy run stopped at the iteration budget" : "iteration budget exhausted";
  return sol;
}

}  // namespace pwrctl
