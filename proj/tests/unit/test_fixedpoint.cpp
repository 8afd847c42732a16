#include <doctest.h>

#include <cmath>
#include <sstream>

#include "instances.hpp"
#include "pwrctl/error.hpp"
#include "pwrctl/fixedpoint.hpp"

using namespace pwrctl;
using namespace testsupport;

namespace {
const NetworkModel kSym(Matrix{{1.0, 0.5}, {0.5, 1.0}}, {0.1, 0.1});

InterferenceMap square_plus_one() {
  return InterferenceMap::custom(2, [](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * p[i] + 1.0;
  });
}
}  // namespace

TEST_CASE("sync iteration on the symmetric pair") {
  const auto map = InterferenceMap::target_sinr(kSym, {1.0, 1.0});
  const auto r = iterate_sync(map, Vector{1.0, 1.0});
  CHECK(r.converged);
  CHECK(std::abs(r.p_bar[0] - 0.2) <= 1e-8);
  CHECK(std::abs(r.p_bar[1] - 0.2) <= 1e-8);
  CHECK(r.residual <= 1e-9);
  CHECK_FALSE(r.schedule_seed);
}

TEST_CASE("capped iteration saturates at p_max when targets are infeasible") {
  const auto map = InterferenceMap::power_capped(InterferenceMap::target_sinr(kSym, {2.5, 2.5}), {1.0, 1.0});
  const auto r = iterate_sync(map, Vector{0.0, 0.0});
  CHECK(r.converged);
  CHECK(r.p_bar == Vector{1.0, 1.0});
  const Vector g = sinr(kSym, r.p_bar);
  CHECK(g[0] < 2.5);
}

TEST_CASE("identity map converges in one iteration") {
  const auto id = InterferenceMap::custom(3, [](std::span<const double> p, std::span<double> out) {
    std::copy(p.begin(), p.end(), out.begin());
  });
  const auto r = iterate_sync(id, Vector{0.3, 1.0, 2.0});
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.p_bar == Vector{0.3, 1.0, 2.0});
}

TEST_CASE("uncapped infeasible targets diverge with the last finite iterate") {
  const auto map = InterferenceMap::target_sinr(kSym, {3.0, 3.0});
  try {
    (void)iterate_sync(map, Vector{1.0, 1.0});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    REQUIRE(e.last_finite().size() == 2);
    CHECK(std::isfinite(e.last_finite()[0]));
  }
}

TEST_CASE("async iteration examples") {
  const auto map = InterferenceMap::target_sinr(kSym, {1.0, 1.0});
  Vector first;
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    AsyncSchedule s;
    s.staleness_bound = 3;
    s.update_probability = {0.6};
    s.seed = seed;
    const auto r = iterate_async(map, Vector{1.0, 1.0}, s);
    CHECK(r.converged);
    CHECK(r.schedule_seed == seed);
    CHECK(std::abs(r.p_bar[0] - 0.2) <= 1e-7);
    if (first.empty()) first = r.p_bar;
    CHECK(max_abs_diff(first, r.p_bar) <= 1e-7);
  }
}

TEST_CASE("degenerate async schedule reproduces the sync trajectory") {
  Rng rng(41);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 1 + rng.below_or_equal(5);
    const NetworkModel m = random_model(rng, n, 0.5);
    const auto map = InterferenceMap::target_sinr(m, targets_with_radius(rng, m, 0.8));
    IterationOptions o;
    o.record_trajectory = true;
    AsyncSchedule s;
    s.seed = 5;
    const auto a = iterate_sync(map, Vector(n, 0.0), o);
    const auto b = iterate_async(map, Vector(n, 0.0), s, o);
    CHECK(a.p_bar == b.p_bar);
    CHECK(a.iterations == b.iterations);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t t = 0; t < a.trajectory.size(); ++t) CHECK(a.trajectory[t].p == b.trajectory[t].p);
  }
}

TEST_CASE("async runs are deterministic per seed") {
  const auto map = InterferenceMap::target_sinr(kSym, {1.5, 1.2});
  AsyncSchedule s;
  s.staleness_bound = 7;
  s.update_probability = {0.5, 0.9};
  s.seed = 1234;
  const auto a = iterate_async(map, Vector{0.0, 0.0}, s);
  const auto b = iterate_async(map, Vector{0.0, 0.0}, s);
  CHECK(a.p_bar == b.p_bar);
  CHECK(a.iterations == b.iterations);
  s.update_probability = {0.0};
  CHECK_THROWS_AS(iterate_async(map, Vector{0.0, 0.0}, s), DomainError);
  s.update_probability = {1.0};
  s.staleness_bound = -1;
  CHECK_THROWS_AS(iterate_async(map, Vector{0.0, 0.0}, s), DomainError);
}

TEST_CASE("component evaluation is bitwise equal to the full map") {
  Rng rng(42);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 1 + rng.below_or_equal(7);
    const NetworkModel m = random_model(rng, n, 1.0);
    const auto inner = InterferenceMap::target_sinr(m, random_vector(rng, n, 0.1, 2.0));
    const auto capped = InterferenceMap::power_capped(inner, random_vector(rng, n, 0.1, 1.0));
    const Vector p = random_vector(rng, n, 0.0, 3.0);
    for (const auto* map : {&inner, &capped}) {
      const Vector full = (*map)(p);
      for (std::size_t i = 0; i < n; ++i) CHECK(map->component(i, p) == full[i]);
    }
  }
}

TEST_CASE("certification examples") {
  const auto ts = InterferenceMap::target_sinr(kSym, {1.0, 2.0});
  SamplerConfig cfg;
  cfg.num_pairs = 500;
  CHECK(certify_standard(ts, cfg).all_passed());

  const auto sq = certify_standard(square_plus_one(), cfg);
  CHECK(sq.positivity.passed());
  CHECK(sq.monotonicity.passed());
  REQUIRE_FALSE(sq.scalability.passed());
  const auto& w = sq.scalability.witnesses.front();
  // alpha I(p) must not exceed I(alpha p) at the witness.
  const double pi = w.p[w.link];
  CHECK(w.alpha * (pi * pi + 1.0) <= (w.alpha * pi) * (w.alpha * pi) + 1.0);
  CHECK(w.lhs <= w.rhs);
  // The hand example: alpha = 2, p = 2 gives 10 < 17.
  CHECK(2.0 * (2.0 * 2.0 + 1.0) < 4.0 * 4.0 + 1.0);

  const auto constant = InterferenceMap::custom(2, [](std::span<const double>, std::span<double> out) {
    out[0] = 0.3;
    out[1] = 1.7;
  });
  CHECK(certify_standard(constant, cfg).all_passed());

  const auto zero = InterferenceMap::custom(1, [](std::span<const double>, std::span<double> out) { out[0] = 0.0; });
  CHECK_FALSE(certify_standard(zero, cfg).positivity.passed());
  const auto falling = InterferenceMap::custom(1, [](std::span<const double> p, std::span<double> out) {
    out[0] = 1.0 / (1.0 + p[0]);
  });
  CHECK_FALSE(certify_standard(falling, cfg).monotonicity.passed());
}

TEST_CASE("property: monotone trajectories from zero and from a feasible start") {
  Rng rng(43);
  for (int k = 0; k < 30; ++k) {
    const std::size_t n = 1 + rng.below_or_equal(5);
    const NetworkModel m = random_model(rng, n, 0.6);
    const Vector g = targets_with_radius(rng, m, rng.uniform(0.1, 0.9));
    const auto map = InterferenceMap::target_sinr(m, g);
    IterationOptions o;
    o.record_trajectory = true;
    o.tol = 1e-12;
    const auto up = iterate_sync(map, Vector(n, 0.0), o);
    Vector start = eigen_min_power(m, g);
    for (double& x : start) x *= 2.0;
    const auto down = iterate_sync(map, start, o);
    for (std::size_t t = 1; t < up.trajectory.size(); ++t)
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(up.trajectory[t].p[i] >= up.trajectory[t - 1].p[i]);
      }
    for (std::size_t t = 1; t < down.trajectory.size(); ++t)
      for (std::size_t i = 0; i < n; ++i) CHECK(down.trajectory[t].p[i] <= down.trajectory[t - 1].p[i]);
    // The fixed point meets the targets.
    const Vector got = sinr(m, up.p_bar);
    for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(g[i]).epsilon(1e-7));
  }
}

TEST_CASE("property: capping twice equals capping once") {
  Rng rng(44);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 1 + rng.below_or_equal(4);
    const NetworkModel m = random_model(rng, n, 0.9);
    const Vector cap = random_vector(rng, n, 0.1, 2.0);
    const auto once = InterferenceMap::power_capped(InterferenceMap::target_sinr(m, random_vector(rng, n, 0.5, 4.0)), cap);
    const auto twice = InterferenceMap::power_capped(once, cap);
    IterationOptions o;
    o.record_trajectory = true;
    const auto a = iterate_sync(once, Vector(n, 0.0), o), b = iterate_sync(twice, Vector(n, 0.0), o);
    CHECK(a.p_bar == b.p_bar);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t t = 0; t < a.trajectory.size(); ++t) CHECK(a.trajectory[t].p == b.trajectory[t].p);
  }
}

TEST_CASE("property: async limits agree with sync within 10 tol") {
  Rng rng(45);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 2 + rng.below_or_equal(4);
    const NetworkModel m = random_model(rng, n, 0.5);
    const auto map = InterferenceMap::target_sinr(m, targets_with_radius(rng, m, rng.uniform(0.1, 0.5)));
    IterationOptions o;
    o.tol = 1e-10;
    const auto s = iterate_sync(map, Vector(n, 0.0), o);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      AsyncSchedule sch;
      sch.staleness_bound = static_cast<int>(rng.below_or_equal(10));
      sch.update_probability = {rng.uniform(0.3, 1.0)};
      sch.seed = seed;
      const auto a = iterate_async(map, Vector(n, 0.0), sch, o);
      CHECK(a.converged);
      CHECK(max_abs_diff(a.p_bar, s.p_bar) <= 10 * o.tol);
    }
  }
}

TEST_CASE("trajectory decimation and csv export") {
  const auto slow = InterferenceMap::custom(1, [](std::span<const double> p, std::span<double> out) {
    out[0] = 0.9999 * p[0] + 1e-4;
  });
  IterationOptions o;
  o.record_trajectory = true;
  o.tol = 1e-12;
  o.max_iter = 300000;
  const auto r = iterate_sync(slow, Vector{0.0}, o);
  CHECK(r.iterations > static_cast<long>(kMaxTrajectorySamples));
  CHECK(r.trajectory.size() <= kMaxTrajectorySamples);
  CHECK(r.trajectory.front().iter == 0);
  std::ostringstream os;
  write_trajectory_csv(os, r.trajectory);
  const std::string text = os.str();
  CHECK(text.rfind("iter,p_1,residual\n", 0) == 0);
}
