#pragma once

#include <cstdint>
#include <random>

namespace pwrctl {

/// Seeded generator with library-independent draws, so seeded outputs do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n] inclusive.
  std::uint64_t below_or_equal(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t span = n + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % span;
  }

  bool bernoulli(double prob) { return prob >= 1.0 || uniform() < prob; }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pwrctl
