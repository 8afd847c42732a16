#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwrctl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch or a model that violates its invariants.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A value outside the domain of an operation. Carries the offending link when known.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what, std::optional<std::size_t> link = std::nullopt)
      : Error(link ? what + " (link " + std::to_string(*link) + ")" : what), link_(link) {}

  std::optional<std::size_t> link() const { return link_; }

 private:
  std::optional<std::size_t> link_;
};

/// Utility with a nonpositive derivative or one that fails the log-concavity certificate.
class InvalidUtilityError : public Error {
 public:
  using Error::Error;
};

/// An iteration ran out of budget. `best_estimate` holds the last usable value.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate)
      : Error(what), best_estimate_(best_estimate) {}

  double best_estimate() const { return best_estimate_; }

 private:
  double best_estimate_;
};

/// A fixed-point or gradient iteration blew up. Holds the last finite iterate.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> last_finite)
      : Error(what), last_finite_(std::move(last_finite)) {}

  const std::vector<double>& last_finite() const { return last_finite_; }

 private:
  std::vector<double> last_finite_;
};

/// A constraint set with no feasible point (e.g. an unreachable QoS floor).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Scenario or command-line input that fails validation.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace pwrctl
