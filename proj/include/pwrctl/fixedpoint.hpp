#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pwrctl/model.hpp"

namespace pwrctl {

/// Power update map p -> I(p).
class InterferenceMap {
 public:
  enum class Kind { TargetSinr, PowerCapped, Custom };
  using Evaluator = std::function<void(std::span<const double> p, std::span<double> out)>;

  /// I_i(p) = gamma_i q_i(p) / h_ii
  static InterferenceMap target_sinr(const NetworkModel& model, Vector gamma_target);
  /// min(p_max_i, inner_i(p))
  static InterferenceMap power_capped(InterferenceMap inner, Vector p_max);
  static InterferenceMap custom(std::size_t size, Evaluator f, std::string label = "custom");

  Kind kind() const { return kind_; }
  std::size_t size() const { return size_; }
  const std::string& label() const { return label_; }

  void evaluate(std::span<const double> p, std::span<double> out) const;
  Vector operator()(std::span<const double> p) const;
  /// I_i(p). Bitwise equal to evaluate(p)[i].
  double component(std::size_t i, std::span<const double> p) const;

 private:
  struct Impl;
  InterferenceMap(Kind kind, std::size_t size, std::string label, std::shared_ptr<const Impl> impl);

  Kind kind_;
  std::size_t size_;
  std::string label_;
  std::shared_ptr<const Impl> impl_;
};

struct TrajectorySample {
  long iter = 0;
  Vector p;
  double residual = 0.0;
};

struct FixedPointResult {
  PowerVector p_bar;
  long iterations = 0;
  /// ||p - I(p)||_inf at the returned iterate.
  double residual = 0.0;
  bool converged = false;
  /// Decimated iterate history (at most kMaxTrajectorySamples entries).
  std::vector<TrajectorySample> trajectory;
  std::optional<std::uint64_t> schedule_seed;
};

inline constexpr std::size_t kMaxTrajectorySamples = 10000;

struct IterationOptions {
  double tol = 1e-9;
  long max_iter = 100000;
  bool record_trajectory = false;
};

/// Seeded virtual-time schedule for totally asynchronous execution.
struct AsyncSchedule {
  /// Each component read may be up to this many activations old.
  int staleness_bound = 0;
  /// Per-link activation probability in (0, 1]; one entry applies to all links.
  Vector update_probability{1.0};
  std::uint64_t seed = 0;
};

/// p(t+1) = I(p(t)) until ||p(t+1) - p(t)||_inf <= tol.
/// Throws DivergenceError if an iterate leaves the finite range.
FixedPointResult iterate_sync(const InterferenceMap& map, std::span<const double> p0, const IterationOptions& opts = {});

/// Each activation updates a random subset of links from component values
/// delayed by up to `staleness_bound` activations. Deterministic given the seed.
FixedPointResult iterate_async(const InterferenceMap& map, std::span<const double> p0, const AsyncSchedule& schedule,
                               const IterationOptions& opts = {});

struct SamplerConfig {
  std::size_t num_pairs = 1000;
  double power_lo = 1e-3;
  double power_hi = 10.0;
  std::uint64_t seed = 0;
};

struct Counterexample {
  std::size_t link = 0;
  Vector p;
  Vector p_prime;  ///< second point (p' >= p) or alpha * p
  double alpha = 1.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct PropertyCheck {
  std::string name;
  long checks = 0;
  long failures = 0;
  std::vector<Counterexample> witnesses;  ///< first few failures
  bool passed() const { return failures == 0; }
};

/// Randomized check of the standard interference function axioms.
struct PropertyReport {
  PropertyCheck positivity{"positivity", 0, 0, {}};
  PropertyCheck monotonicity{"monotonicity", 0, 0, {}};
  PropertyCheck scalability{"scalability", 0, 0, {}};
  bool all_passed() const { return positivity.passed() && monotonicity.passed() && scalability.passed(); }
};

PropertyReport certify_standard(const InterferenceMap& map, const SamplerConfig& sampler);

/// CSV with columns iter, p_1..p_n, residual.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& trajectory);

}  // namespace pwrctl
