#include "pwrctl/utility.hpp"

#include <cmath>
#include <string>

#include "pwrctl/error.hpp"

namespace pwrctl {

Utility Utility::log() { return Utility(Family::Log, 1.0, "log"); }

Utility Utility::alpha_fair(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha-fair utility needs finite alpha >= 0");
  if (alpha == 1.0) return log();
  return Utility(Family::AlphaFair, alpha, "alpha_fair");
}

Utility Utility::rate() { return Utility(Family::Rate, 1.0, "rate"); }

Utility Utility::tabulated(Evaluator u, Evaluator du, Evaluator d2u, std::string label) {
  if (!u || !du || !d2u) throw InvalidUtilityError("tabulated utility needs all three evaluators");
  Utility out(Family::Tabulated, 1.0, std::move(label));
  out.fns_ = std::make_shared<const Callables>(Callables{std::move(u), std::move(du), std::move(d2u)});
  return out;
}

double Utility::value(double g) const {
  switch (family_) {
    case Family::Log:
      return std::log(g);
    case Family::AlphaFair:
      return std::pow(g, 1.0 - alpha_) / (1.0 - alpha_);
    case Family::Rate:
      return std::log1p(g);
    case Family::Tabulated:
      return fns_->u(g);
  }
  return 0.0;
}

double Utility::d1(double g) const {
  switch (family_) {
    case Family::Log:
      return 1.0 / g;
    case Family::AlphaFair:
      return std::pow(g, -alpha_);
    case Family::Rate:
      return 1.0 / (1.0 + g);
    case Family::Tabulated:
      return fns_->du(g);
  }
  return 0.0;
}

double Utility::d2(double g) const {
  switch (family_) {
    case Family::Log:
      return -1.0 / (g * g);
    case Family::AlphaFair:
      return -alpha_ * std::pow(g, -alpha_ - 1.0);
    case Family::Rate:
      return -1.0 / ((1.0 + g) * (1.0 + g));
    case Family::Tabulated:
      return fns_->d2u(g);
  }
  return 0.0;
}

bool Utility::operator==(const Utility& other) const {
  if (family_ != other.family_) return false;
  if (family_ == Family::AlphaFair) return alpha_ == other.alpha_;
  if (family_ == Family::Tabulated) return label_ == other.label_;
  return true;
}

UtilitySpec::UtilitySpec(std::vector<Utility> per_link) : per_link_(std::move(per_link)) {
  if (per_link_.empty()) throw ModelError("utility assignment is empty");
}

void UtilitySpec::check_size(std::size_t num_links) const {
  if (per_link_.size() != 1 && per_link_.size() != num_links)
    throw ModelError("utility assignment covers " + std::to_string(per_link_.size()) + " links, model has " +
                     std::to_string(num_links));
}

double relative_risk_aversion(const Utility& u, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("relative risk aversion needs gamma > 0");
  const double du = u.d1(gamma);
  if (!(du > 0.0)) throw InvalidUtilityError("utility '" + u.label() + "' has u'(" + std::to_string(gamma) + ") <= 0");
  return -gamma * u.d2(gamma) / du;
}

std::optional<double> log_concavity_violation(const Utility& u, double lo, double hi, int samples) {
  const double llo = std::log(lo);
  const double step = samples > 1 ? (std::log(hi) - llo) / (samples - 1) : 0.0;
  for (int k = 0; k < samples; ++k) {
    const double g = std::exp(llo + step * k);
    double rra;
    try {
      rra = relative_risk_aversion(u, g);
    } catch (const InvalidUtilityError&) {
      return g;
    }
    if (!(rra >= 1.0 - 1e-12)) return g;
  }
  return std::nullopt;
}

double capacity(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("capacity needs gamma >= 0");
  return std::log2(1.0 + gamma);
}

}  // namespace pwrctl
