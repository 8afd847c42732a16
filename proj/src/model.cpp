#include "pwrctl/model.hpp"

#include <cmath>
#include <string>

#include "pwrctl/error.hpp"
#include "pwrctl/kernels.hpp"

namespace pwrctl {

namespace {

Vector filled_or(Vector v, std::size_t n, double fill, const char* what) {
  if (v.empty()) return Vector(n, fill);
  if (v.size() != n) throw ModelError(std::string(what) + " has length " + std::to_string(v.size()) +
                                      ", expected " + std::to_string(n));
  return v;
}

}  // namespace

NetworkModel::NetworkModel(Matrix gain, Vector noise, Vector p_min, Vector p_max, Vector gamma_min,
                           Vector gamma_max)
    : gain_(std::move(gain)), noise_(std::move(noise)) {
  const std::size_t n = noise_.size();
  if (n == 0) throw ModelError("network needs at least one link");
  if (gain_.rows() != n || gain_.cols() != n)
    throw ModelError("gain matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  p_min_ = filled_or(std::move(p_min), n, 0.0, "p_min");
  p_max_ = filled_or(std::move(p_max), n, kInf, "p_max");
  gamma_min_ = filled_or(std::move(gamma_min), n, 0.0, "gamma_min");
  gamma_max_ = filled_or(std::move(gamma_max), n, kInf, "gamma_max");

  for (std::size_t i = 0; i < n; ++i) {
    const auto link = " (link " + std::to_string(i) + ")";
    if (!(gain_(i, i) > 0.0) || !std::isfinite(gain_(i, i))) throw ModelError("direct gain must be positive" + link);
    for (std::size_t k = 0; k < n; ++k)
      if (!(gain_(k, i) >= 0.0) || !std::isfinite(gain_(k, i))) throw ModelError("gains must be finite and >= 0" + link);
    if (!(noise_[i] > 0.0) || !std::isfinite(noise_[i])) throw ModelError("noise must be positive" + link);
    if (!(p_min_[i] >= 0.0) || !std::isfinite(p_min_[i])) throw ModelError("p_min must be finite and >= 0" + link);
    if (!(p_min_[i] <= p_max_[i])) throw ModelError("p_min exceeds p_max" + link);
    if (!(gamma_min_[i] >= 0.0) || !std::isfinite(gamma_min_[i])) throw ModelError("gamma_min must be finite and >= 0" + link);
    if (!(gamma_min_[i] <= gamma_max_[i])) throw ModelError("gamma_min exceeds gamma_max" + link);
  }

  rx_cross_ = Matrix(n, n);
  tx_cross_ = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (k == i) continue;
      rx_cross_(i, k) = gain_(k, i);
      tx_cross_(k, i) = gain_(k, i);
      if (gain_(k, i) != 0.0) decoupled_ = false;
    }
  }
}

bool NetworkModel::has_sinr_bounds() const {
  for (std::size_t i = 0; i < num_links(); ++i)
    if (gamma_min_[i] > 0.0 || std::isfinite(gamma_max_[i])) return true;
  return false;
}

NetworkModel NetworkModel::with_limits(Vector p_min, Vector p_max, Vector gamma_min, Vector gamma_max) const {
  return NetworkModel(gain_, noise_, p_min.empty() ? p_min_ : std::move(p_min), p_max.empty() ? p_max_ : std::move(p_max),
                      gamma_min.empty() ? gamma_min_ : std::move(gamma_min),
                      gamma_max.empty() ? gamma_max_ : std::move(gamma_max));
}

bool NetworkModel::operator==(const NetworkModel& o) const {
  return gain_ == o.gain_ && noise_ == o.noise_ && p_min_ == o.p_min_ && p_max_ == o.p_max_ &&
         gamma_min_ == o.gamma_min_ && gamma_max_ == o.gamma_max_;
}

void check_power(const NetworkModel& model, std::span<const double> p) {
  if (p.size() != model.num_links())
    throw ModelError("power vector has length " + std::to_string(p.size()) + ", model has " +
                     std::to_string(model.num_links()) + " links");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!(p[i] >= 0.0) || !std::isfinite(p[i])) throw DomainError("power must be finite and >= 0", i);
}

Vector interference(const NetworkModel& model, std::span<const double> p) {
  check_power(model, p);
  const std::size_t n = model.num_links();
  Vector q(n);
  kernels::gemv(model.rx_cross().data(), n, n, p.data(), model.noise().data(), q.data());
  return q;
}

SinrVector sinr_from(const NetworkModel& model, std::span<const double> p, std::span<const double> q) {
  const std::size_t n = model.num_links();
  if (q.size() != n || p.size() != n) throw ModelError("sinr: dimension mismatch");
  SinrVector g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = p[i] == 0.0 ? 0.0 : model.direct(i) * p[i] / q[i];
  return g;
}

SinrVector sinr(const NetworkModel& model, std::span<const double> p) {
  const Vector q = interference(model, p);
  return sinr_from(model, p, q);
}

double total_utility_at(std::span<const double> gamma, const UtilitySpec& u) {
  u.check_size(gamma.size());
  double total = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    const Utility& ui = u.at(i);
    if (ui.needs_positive_sinr() && !(gamma[i] > 0.0))
      throw DomainError("utility '" + ui.label() + "' undefined at zero SINR", i);
    total += ui.value(gamma[i]);
  }
  return total;
}

double total_utility(const NetworkModel& model, std::span<const double> p, const UtilitySpec& u) {
  return total_utility_at(sinr(model, p), u);
}

}  // namespace pwrctl
