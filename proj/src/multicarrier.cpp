#include "pwrctl/multicarrier.hpp"

#include <algorithm>
#include <cmath>

#include "ascent.hpp"
#include "logopt_detail.hpp"
#include "pwrctl/error.hpp"

namespace pwrctl {

namespace {

using detail::sorted_sum;

Vector broadcast(Vector v, std::size_t n, double fill, const char* what) {
  if (v.empty()) return Vector(n, fill);
  if (v.size() == 1 && n > 1) return Vector(n, v[0]);
  if (v.size() != n) throw ModelError(std::string(what) + " has wrong length");
  return v;
}

// C^1 saturation: identity below cap - band, constant cap above cap + band,
// quadratic blend in between.
double saturate(double v, double cap, double band) {
  if (!std::isfinite(cap) || v <= cap - band) return v;
  if (v >= cap + band) return cap;
  const double t = v - cap + band;
  return v - t * t / (4.0 * band);
}

double saturate_slope(double v, double cap, double band) {
  if (!std::isfinite(cap) || v <= cap - band) return 1.0;
  if (v >= cap + band) return 0.0;
  return 1.0 - (v - cap + band) / (2.0 * band);
}

bool concave_increasing(const Utility& u) {
  for (int k = 0; k <= 160; ++k) {
    const double g = std::exp(std::log(1e-4) + k * (std::log(1e8) / 160.0));
    if (!(u.d1(g) > 0.0) || !(u.d2(g) <= 0.0)) return false;
  }
  return true;
}

}  // namespace

MultiCarrierModel::MultiCarrierModel(std::vector<NetworkModel> carriers, Vector p_budget, Vector u_min, Vector v_max)
    : carriers_(std::move(carriers)) {
  if (carriers_.empty()) throw ModelError("multi-carrier model needs at least one carrier");
  const std::size_t n = carriers_.front().num_links();
  for (const auto& c : carriers_)
    if (c.num_links() != n) throw ModelError("every carrier must serve the same links");
  p_budget_ = broadcast(std::move(p_budget), n, kInf, "p_budget");
  u_min_ = broadcast(std::move(u_min), n, -kInf, "u_min");
  v_max_ = broadcast(std::move(v_max), n, kInf, "v_max");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p_budget_[i] > 0.0)) throw ModelError("power budget must be positive (link " + std::to_string(i) + ")");
    if (std::isnan(u_min_[i]) || std::isnan(v_max_[i])) throw ModelError("QoS bounds must not be NaN");
  }
}

bool MultiCarrierModel::has_qos_floor() const {
  return std::any_of(u_min_.begin(), u_min_.end(), [](double v) { return std::isfinite(v); });
}

bool MultiCarrierModel::has_utility_ceiling() const {
  return std::any_of(v_max_.begin(), v_max_.end(), [](double v) { return std::isfinite(v); });
}

MultiCarrierModel MultiCarrierModel::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != carriers_.size()) throw ModelError("carrier permutation has wrong length");
  std::vector<NetworkModel> out;
  out.reserve(perm.size());
  for (std::size_t f : perm) out.push_back(carriers_.at(f));
  return MultiCarrierModel(std::move(out), p_budget_, u_min_, v_max_);
}

const Utility& CarrierUtilitySplit::v(std::size_t link, std::size_t carrier) const {
  return (objective.size() == 1 ? objective[0] : objective.at(carrier)).at(link);
}

const Utility& CarrierUtilitySplit::u(std::size_t link, std::size_t carrier) const {
  return (qos.size() == 1 ? qos[0] : qos.at(carrier)).at(link);
}

void CarrierUtilitySplit::check_size(std::size_t num_links, std::size_t num_carriers) const {
  for (const auto* list : {&objective, &qos}) {
    if (list->size() != 1 && list->size() != num_carriers) throw ModelError("utility split does not match carrier count");
    for (const auto& spec : *list) spec.check_size(num_links);
  }
}

SinrMatrix sinr_mc(const MultiCarrierModel& model, const PowerMatrix& p) {
  const std::size_t n = model.num_links(), nf = model.num_carriers();
  if (p.rows() != n || p.cols() != nf) throw ModelError("power matrix must be links x carriers");
  SinrMatrix out(n, nf);
  Vector col(n);
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t i = 0; i < n; ++i) col[i] = p(i, f);
    const SinrVector g = sinr(model.carrier(f), col);
    for (std::size_t i = 0; i < n; ++i) out(i, f) = g[i];
  }
  return out;
}

McFeasibility feasibility_mc(const MultiCarrierModel& model, const Matrix& gamma_target) {
  const std::size_t n = model.num_links(), nf = model.num_carriers();
  if (gamma_target.rows() != n || gamma_target.cols() != nf) throw ModelError("target matrix must be links x carriers");
  McFeasibility out;
  out.budget_evaluated = true;
  for (std::size_t f = 0; f < nf; ++f) {
    const NetworkModel& c = model.carrier(f);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = gamma_target(i, f);
      if (t < 0.0 || !std::isfinite(t)) throw DomainError("SINR target must be finite and >= 0", i);
      if (t > 0.0) active.push_back(i);
    }
    FeasibilityVerdict v;
    if (active.empty()) {
      v.status = FeasibilityStatus::Feasible;
      v.p_star = Vector(n, 0.0);
    } else {
      // Restrict the carrier to its active links; silent links transmit nothing.
      const std::size_t m = active.size();
      Matrix g(m, m);
      Vector noise(m), pmin(m), pmax(m), target(m);
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) g(a, b) = c.gain(active[a], active[b]);
        noise[a] = c.noise()[active[a]];
        pmin[a] = c.p_min()[active[a]];
        pmax[a] = c.p_max()[active[a]];
        target[a] = gamma_target(active[a], f);
      }
      FeasibilityVerdict sub = check_feasibility(NetworkModel(g, noise, pmin, pmax), target);
      v.rho = sub.rho;
      v.status = sub.status;
      if (sub.p_star) {
        v.p_star = Vector(n, 0.0);
        for (std::size_t a = 0; a < m; ++a) (*v.p_star)[active[a]] = (*sub.p_star)[a];
      }
      for (auto bv : sub.bound_violations) {
        bv.link = active[bv.link];
        v.bound_violations.push_back(bv);
      }
    }
    if (!v.p_star) out.budget_evaluated = false;
    out.per_carrier.push_back(std::move(v));
  }
  if (out.budget_evaluated) {
    Vector row(nf);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t f = 0; f < nf; ++f) row[f] = (*out.per_carrier[f].p_star)[i];
      if (sorted_sum(row) > model.p_budget()[i]) out.budget_violations.push_back(i);
    }
  }
  return out;
}

std::vector<BudgetUsage> budget_check(const MultiCarrierModel& model, const PowerMatrix& p) {
  const std::size_t n = model.num_links(), nf = model.num_carriers();
  if (p.rows() != n || p.cols() != nf) throw ModelError("power matrix must be links x carriers");
  std::vector<BudgetUsage> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].used = sorted_sum(p.row(i));
    out[i].budget = model.p_budget()[i];
    out[i].slack = out[i].budget - out[i].used;
  }
  return out;
}

McSolution solve_mc(const MultiCarrierModel& model, const CarrierUtilitySplit& split, const McConfig& cfg) {
  const std::size_t n = model.num_links(), nf = model.num_carriers(), dim = n * nf;
  split.check_size(n, nf);
  if (!(cfg.dual_step > 0.0)) throw DomainError("dual step must be positive");

  if (!cfg.allow_nonconcave) {
    for (std::size_t f = 0; f < nf; ++f) {
      for (std::size_t i = 0; i < n; ++i) {
        const Utility& v = split.v(i, f);
        if (!log_concavity_violation(v)) continue;
        // Without interference the SINR is linear in power, so concavity in p suffices.
        if (model.carrier(f).decoupled() && concave_increasing(v)) continue;
        throw InvalidUtilityError("objective utility '" + v.label() + "' of link " + std::to_string(i) +
                                  " on carrier " + std::to_string(f) + " fails the log-concavity certificate");
      }
    }
  }

  // Flat layout: index i * nf + f.
  detail::AscentProblem pb;
  pb.lo.resize(dim);
  pb.hi.resize(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < nf; ++f) {
      const NetworkModel& c = model.carrier(f);
      const double cap = std::min(c.p_max()[i], model.p_budget()[i]);
      if (!std::isfinite(cap)) throw DomainError("link needs a finite carrier cap or budget", i);
      if (!(cap >= kMinLogPower)) throw DomainError("carrier cap below 1e-12 W", i);
      pb.lo[i * nf + f] = std::log(std::max(c.p_min()[i], kMinLogPower));
      pb.hi[i * nf + f] = std::log(cap);
    }
  }
  pb.reduce = [](std::span<const double> v) { return sorted_sum(v); };

  const bool per_carrier_qos = cfg.qos_mode == QosMode::PerCarrier;
  const std::size_t qos_cols = per_carrier_qos ? nf : 1;

  // Interference-free SINRs at full power bound every attainable QoS level, so a
  // floor above them is infeasible without running the penalty ramp.
  for (std::size_t i = 0; i < n && model.has_qos_floor(); ++i) {
    const double floor = model.u_min()[i];
    if (!std::isfinite(floor)) continue;
    double total = 0.0, worst_single = kInf;
    for (std::size_t f = 0; f < nf; ++f) {
      const NetworkModel& c = model.carrier(f);
      const double p = std::min(c.p_max()[i], model.p_budget()[i]);
      const double level = split.u(i, f).value(c.gain()(i, i) * p / c.noise()[i]);
      total += level;
      worst_single = std::min(worst_single, level);
    }
    const double reach = per_carrier_qos ? worst_single : total;
    if (reach < floor) {
      McSolution sol;
      sol.p = Matrix(n, nf);
      sol.budget_dual = Vector(n, 0.0);
      sol.qos_dual = Matrix(n, qos_cols);
      sol.status = SolveStatus::Infeasible;
      sol.diagnostic = "QoS floor of link " + std::to_string(i) + " exceeds its interference-free reach " +
                       std::to_string(reach);
      return sol;
    }
  }
  Vector mu(n, 0.0);
  Matrix lam_q(n, qos_cols);
  double rho = 1.0;

  struct Eval {
    double objective = 0.0;   // true objective
    double lagrangian = 0.0;  // objective with dual and penalty terms
    Vector used;              // sum_f p
    Matrix qos_gap;           // U_min - U (per link or per link and carrier)
    Matrix sigma;             // penalty-shifted QoS multipliers
  };

  auto evaluate = [&](std::span<const double> y, std::span<double> grad) {
    Eval e{0.0, 0.0, Vector(n), Matrix(n, qos_cols), Matrix(n, qos_cols)};
    std::vector<detail::LinkState> states;
    states.reserve(nf);
    Vector col(n);
    for (std::size_t f = 0; f < nf; ++f) {
      for (std::size_t i = 0; i < n; ++i) col[i] = y[i * nf + f];
      states.push_back(detail::link_state(model.carrier(f), col));
    }
    Vector row(nf), vsum(n), link_obj(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t f = 0; f < nf; ++f) row[f] = split.v(i, f).value(states[f].gamma[i]);
      vsum[i] = sorted_sum(row);
      link_obj[i] = saturate(vsum[i], model.v_max()[i], cfg.saturation_band);
      for (std::size_t f = 0; f < nf; ++f) row[f] = states[f].p[i];
      e.used[i] = sorted_sum(row);
    }
    e.objective = sorted_sum(link_obj);
    e.lagrangian = e.objective;
    for (std::size_t i = 0; i < n; ++i)
      if (std::isfinite(model.p_budget()[i])) e.lagrangian -= mu[i] * (e.used[i] - model.p_budget()[i]);

    for (std::size_t i = 0; i < n; ++i) {
      const double floor = model.u_min()[i];
      if (!std::isfinite(floor)) continue;
      for (std::size_t c = 0; c < qos_cols; ++c) {
        double level;
        if (per_carrier_qos) {
          level = split.u(i, c).value(states[c].gamma[i]);
        } else {
          for (std::size_t f = 0; f < nf; ++f) row[f] = split.u(i, f).value(states[f].gamma[i]);
          level = sorted_sum(row);
        }
        e.qos_gap(i, c) = floor - level;
        e.sigma(i, c) = std::max(0.0, lam_q(i, c) + rho * e.qos_gap(i, c));
        e.lagrangian -= (e.sigma(i, c) * e.sigma(i, c) - lam_q(i, c) * lam_q(i, c)) / (2.0 * rho);
      }
    }

    if (!grad.empty()) {
      Vector a(n), g(n);
      for (std::size_t f = 0; f < nf; ++f) {
        const auto& s = states[f];
        for (std::size_t i = 0; i < n; ++i) {
          const double slope = saturate_slope(vsum[i], model.v_max()[i], cfg.saturation_band);
          a[i] = slope * split.v(i, f).d1(s.gamma[i]) * s.gamma[i];
          const double sig = e.sigma(i, per_carrier_qos ? f : 0);
          if (sig != 0.0) a[i] += sig * split.u(i, f).d1(s.gamma[i]) * s.gamma[i];
        }
        detail::weighted_gradient(model.carrier(f), s, a, g);
        for (std::size_t i = 0; i < n; ++i) {
          const double budget_term = std::isfinite(model.p_budget()[i]) ? mu[i] * s.p[i] : 0.0;
          grad[i * nf + f] = g[i] - budget_term;
        }
      }
    }
    return e;
  };

  pb.eval = [&](std::span<const double> y, std::span<double> grad) {
    const double v = evaluate(y, grad).lagrangian;
    return std::isfinite(v) ? v : -kInf;
  };

  detail::AscentOptions opts;
  opts.tol = 1e-2 * cfg.tol;
  opts.diagonal_steps = true;
  opts.flat_rel = 1e-10;

  McSolution sol;
  Vector y = pb.hi;
  Vector kappa(n, cfg.dual_step);
  std::vector<int> last_sign(n, 0), streak(n, 0);
  constexpr int kGrowAfter = 10;
  constexpr double kMaxWeight = 1e8;
  constexpr long kInnerRoundCap = 100'000;
  double prev_qos = kInf;
  long used_iter = 0;
  detail::AscentResult res;
  Eval e;
  for (;;) {
    opts.max_iter = std::max(0L, cfg.max_iter - used_iter);
    if (model.has_qos_floor()) {
      // Penalty gradients scale with the multipliers, so the inner test is relative
      // to them, and no single round may starve the weight ramp.
      double scale = 1.0;
      for (std::size_t k = 0; k < n * qos_cols; ++k) scale = std::max(scale, lam_q.data()[k]);
      opts.tol = 1e-2 * cfg.tol * scale;
      opts.max_iter = std::min(opts.max_iter, kInnerRoundCap);
    }
    res = detail::projected_ascent(pb, y, opts);
    used_iter += res.iterations;
    y = res.y;
    // Large QoS penalty weights make the inner tolerance hard to reach; an
    // unfinished inner round is then as good as it gets and the ramp decides.
    const bool stall_ok = !res.converged && model.has_qos_floor() && used_iter < cfg.max_iter;
    if (!res.converged && !stall_ok) {
      sol.status = res.stalled ? SolveStatus::Stalled : SolveStatus::MaxIterations;
      sol.diagnostic = "inner power update did not converge";
      break;
    }
    e = evaluate(y, {});

    bool budget_ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double budget = model.p_budget()[i];
      if (!std::isfinite(budget)) continue;
      const double r = e.used[i] - budget;
      const double tol_b = cfg.tol * std::max(1.0, budget);
      if (r > tol_b || (mu[i] > 0.0 && -r > tol_b)) budget_ok = false;
    }
    if (!budget_ok) {
      if (++sol.dual_iterations > cfg.max_dual_iter) {
        sol.status = SolveStatus::MaxIterations;
        sol.diagnostic = "budget duals did not settle";
        break;
      }
      // Projected subgradient step; the step halves when the residual flips
      // sign and doubles after a run of same-sign steps.
      for (std::size_t i = 0; i < n; ++i) {
        const double budget = model.p_budget()[i];
        if (!std::isfinite(budget)) continue;
        const double r = e.used[i] - budget;
        const double next = std::max(0.0, mu[i] + kappa[i] * r);
        if (next == mu[i]) continue;
        const int sign = r > 0.0 ? 1 : -1;
        if (sign == -last_sign[i]) {
          kappa[i] *= 0.5;
          streak[i] = 0;
        } else if (++streak[i] >= kGrowAfter) {
          kappa[i] *= 2.0;
          streak[i] = 0;
        }
        last_sign[i] = sign;
        mu[i] = next;
      }
      continue;
    }

    double qos = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < qos_cols; ++c) qos = std::max(qos, e.qos_gap(i, c));
    if (qos <= cfg.tol) {
      sol.status = SolveStatus::Converged;
      break;
    }
    lam_q = e.sigma;
    if (qos > 0.25 * prev_qos) rho *= 2.0;
    prev_qos = qos;
    if (rho > kMaxWeight) {
      sol.status = SolveStatus::Infeasible;
      sol.diagnostic = "QoS floor not attained when the penalty weight ran out (shortfall " + std::to_string(qos) +
                       "); floors couple links through interference, so this verdict is local";
      break;
    }
  }

  sol.iterations = used_iter;
  sol.budget_dual = mu;
  sol.qos_dual = e.sigma.rows() ? e.sigma : Matrix(n, qos_cols);
  sol.residuals.stationarity_inf_norm = res.stationarity;

  // Trim the last subgradient residual so budgets hold exactly.
  sol.p = Matrix(n, nf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < nf; ++f) sol.p(i, f) = std::exp(y[i * nf + f]);
    const double used = sorted_sum(sol.p.row(i));
    const double budget = model.p_budget()[i];
    if (used > budget)
      for (std::size_t f = 0; f < nf; ++f) sol.p(i, f) *= budget / used;
  }

  Vector yfinal(dim);
  for (std::size_t k = 0; k < dim; ++k) yfinal[k] = std::log(sol.p.data()[k]);
  e = evaluate(yfinal, {});
  sol.objective = e.objective;
  for (std::size_t i = 0; i < n; ++i) {
    const double budget = model.p_budget()[i];
    if (std::isfinite(budget)) {
      const double r = e.used[i] - budget;
      sol.residuals.budget_violation = std::max(sol.residuals.budget_violation, r);
      sol.residuals.comp_slack_max = std::max(sol.residuals.comp_slack_max, mu[i] * std::fabs(r));
    }
    for (std::size_t c = 0; c < qos_cols; ++c) {
      if (!std::isfinite(model.u_min()[i])) continue;
      sol.residuals.qos_violation = std::max(sol.residuals.qos_violation, e.qos_gap(i, c));
      sol.residuals.comp_slack_max =
          std::max(sol.residuals.comp_slack_max, sol.qos_dual(i, c) * std::fabs(e.qos_gap(i, c)));
    }
  }
  sol.converged = sol.status == SolveStatus::Converged;
  return sol;
}

}  // namespace pwrctl
