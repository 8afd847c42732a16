#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pwrctl {

/// Per-link utility of SINR, u(gamma), with analytic first and second derivatives.
class Utility {
 public:
  enum class Family { Log, AlphaFair, Rate, Tabulated };

  using Evaluator = std::function<double(double)>;

  /// u = ln(gamma)
  static Utility log();
  /// u = gamma^(1-alpha)/(1-alpha); alpha == 1 yields log().
  static Utility alpha_fair(double alpha);
  /// u = ln(1 + gamma)
  static Utility rate();
  /// User-supplied value and derivative evaluators.
  static Utility tabulated(Evaluator u, Evaluator du, Evaluator d2u, std::string label = "custom");

  Family family() const { return family_; }
  double alpha() const { return alpha_; }
  const std::string& label() const { return label_; }

  /// True when u is only defined for gamma > 0.
  bool needs_positive_sinr() const { return family_ == Family::Log || family_ == Family::AlphaFair; }

  double value(double gamma) const;
  double d1(double gamma) const;
  double d2(double gamma) const;

  /// Structural equality; tabulated utilities compare by label.
  bool operator==(const Utility& other) const;

 private:
  Utility(Family f, double alpha, std::string label) : family_(f), alpha_(alpha), label_(std::move(label)) {}

  struct Callables {
    Evaluator u, du, d2u;
  };

  Family family_;
  double alpha_ = 1.0;
  std::string label_;
  std::shared_ptr<const Callables> fns_;
};

/// Assignment of utilities to links. A single entry applies to every link.
class UtilitySpec {
 public:
  UtilitySpec() : UtilitySpec(Utility::log()) {}
  UtilitySpec(Utility uniform) : per_link_{std::move(uniform)} {}  // NOLINT: implicit broadcast
  explicit UtilitySpec(std::vector<Utility> per_link);

  const Utility& at(std::size_t link) const { return per_link_.size() == 1 ? per_link_[0] : per_link_.at(link); }
  bool uniform() const { return per_link_.size() == 1; }
  const std::vector<Utility>& entries() const { return per_link_; }

  /// Throws ModelError when the assignment cannot cover `num_links` links.
  void check_size(std::size_t num_links) const;

  bool operator==(const UtilitySpec&) const = default;

 private:
  std::vector<Utility> per_link_;
};

/// -gamma u''(gamma) / u'(gamma). Throws InvalidUtilityError when u'(gamma) <= 0.
double relative_risk_aversion(const Utility& u, double gamma);

/// Checks relative_risk_aversion >= 1 on a log-spaced grid over [lo, hi].
/// Returns the first failing gamma, or nullopt if u(e^z) is certified concave.
std::optional<double> log_concavity_violation(const Utility& u, double lo = 1e-4, double hi = 1e4,
                                              int samples = 161);

/// Shannon capacity log2(1 + gamma) in bit/s/Hz.
double capacity(double gamma);

}  // namespace pwrctl
