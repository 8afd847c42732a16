#include <doctest.h>

#include <cmath>

#include "instances.hpp"
#include "pwrctl/error.hpp"
#include "pwrctl/model.hpp"

using namespace pwrctl;
using testsupport::random_model;
using testsupport::random_vector;

namespace {
const NetworkModel kSym(Matrix{{1.0, 0.5}, {0.5, 1.0}}, {0.1, 0.1});
}

TEST_CASE("interference and sinr on the symmetric pair") {
  const Vector q = interference(kSym, Vector{1.0, 1.0});
  CHECK(q[0] == doctest::Approx(0.6));
  CHECK(q[1] == doctest::Approx(0.6));
  const Vector g = sinr(kSym, Vector{1.0, 1.0});
  CHECK(g[0] == doctest::Approx(5.0 / 3.0));
  CHECK(g[1] == doctest::Approx(5.0 / 3.0));
  CHECK(interference(kSym, Vector{0.0, 0.0}) == kSym.noise());
  CHECK(sinr(kSym, Vector{0.0, 0.0}) == Vector{0.0, 0.0});
}

TEST_CASE("single link and decoupled networks") {
  const NetworkModel one(Matrix{{1.0}}, {0.1});
  CHECK(sinr(one, Vector{0.5})[0] == doctest::Approx(5.0));
  CHECK(total_utility(one, Vector{0.5}, Utility::log()) == doctest::Approx(std::log(5.0)));
  const NetworkModel diag(Matrix{{2.0, 0.0}, {0.0, 3.0}}, {0.1, 0.2});
  CHECK(diag.decoupled());
  CHECK(interference(diag, Vector{4.0, 9.0}) == diag.noise());
}

TEST_CASE("total utility") {
  CHECK(total_utility(kSym, Vector{1.0, 1.0}, Utility::log()) == doctest::Approx(2.0 * std::log(5.0 / 3.0)));
  CHECK(total_utility(kSym, Vector{0.0, 0.0}, Utility::rate()) == 0.0);
  try {
    (void)total_utility(kSym, Vector{1.0, 0.0}, Utility::log());
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    REQUIRE(e.link().has_value());
    CHECK(*e.link() == 1);
  }
}

TEST_CASE("model invariants are enforced") {
  CHECK_THROWS_AS(NetworkModel(Matrix{{0.0, 0.1}, {0.1, 1.0}}, {0.1, 0.1}), ModelError);
  CHECK_THROWS_AS(NetworkModel(Matrix{{1.0, -0.1}, {0.1, 1.0}}, {0.1, 0.1}), ModelError);
  CHECK_THROWS_AS(NetworkModel(Matrix{{1.0, 0.1}, {0.1, 1.0}}, {0.1, 0.0}), ModelError);
  CHECK_THROWS_AS(NetworkModel(Matrix{{1.0, 0.1}}, {0.1}), ModelError);
  CHECK_THROWS_AS(NetworkModel(Matrix{{1.0}}, {0.1}, {2.0}, {1.0}), ModelError);
  CHECK_THROWS_AS(NetworkModel(Matrix{{1.0}}, {0.1}, {}, {}, {3.0}, {2.0}), ModelError);
  CHECK_THROWS_AS(interference(kSym, Vector{1.0}), ModelError);
  CHECK_THROWS_AS(sinr(kSym, Vector{1.0, -1.0}), DomainError);
  CHECK_THROWS_AS(sinr(kSym, Vector{1.0, NAN}), DomainError);
}

TEST_CASE("limits default to no constraint") {
  CHECK(kSym.p_max()[0] == kInf);
  CHECK(kSym.gamma_max()[1] == kInf);
  CHECK(kSym.p_min()[0] == 0.0);
  CHECK_FALSE(kSym.has_sinr_bounds());
  const NetworkModel b = kSym.with_limits({}, {1.0, 1.0}, {0.5, 0.5});
  CHECK(b.has_sinr_bounds());
  CHECK(b.p_max()[1] == 1.0);
}

TEST_CASE("property: sinr times interference recovers the received signal") {
  Rng rng(21);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + rng.below_or_equal(6);
    const NetworkModel m = random_model(rng, n, 2.0);
    const Vector p = random_vector(rng, n, 0.0, 5.0);
    const Vector q = interference(m, p), g = sinr(m, p);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(q[i] >= m.noise()[i]);
      const double s = m.direct(i) * p[i];
      CHECK(std::abs(g[i] * q[i] - s) <= 1e-12 * std::max(s, 1e-300));
    }
  }
}

TEST_CASE("property: scale covariance of powers and noise") {
  Rng rng(22);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 1 + rng.below_or_equal(5);
    const NetworkModel m = random_model(rng, n, 1.0);
    const double c = std::exp(rng.uniform(-5.0, 5.0));
    Vector noise = m.noise();
    for (double& x : noise) x *= c;
    const NetworkModel scaled(m.gain(), noise);
    Vector p = random_vector(rng, n, 0.0, 2.0), cp = p;
    for (double& x : cp) x *= c;
    const Vector a = sinr(m, p), b = sinr(scaled, cp);
    for (std::size_t i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));
  }
}

TEST_CASE("property: own power raises sinr, others' power lowers it") {
  Rng rng(23);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + rng.below_or_equal(4);
    const NetworkModel m = random_model(rng, n, 1.0);
    const Vector p = random_vector(rng, n, 0.01, 2.0);
    const std::size_t j = rng.below_or_equal(n - 1);
    Vector up = p;
    up[j] *= 1.5;
    const Vector a = sinr(m, p), b = sinr(m, up);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) CHECK(b[i] > a[i]);
      else CHECK(b[i] <= a[i]);
    }
  }
}
