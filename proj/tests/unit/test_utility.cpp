#include <doctest.h>

#include <cmath>

#include "pwrctl/error.hpp"
#include "pwrctl/rng.hpp"
#include "pwrctl/utility.hpp"

using namespace pwrctl;

TEST_CASE("utility values") {
  CHECK(Utility::log().value(5.0) == doctest::Approx(std::log(5.0)));
  CHECK(Utility::rate().value(0.0) == 0.0);
  CHECK(Utility::alpha_fair(2.0).value(4.0) == doctest::Approx(-0.25));
  CHECK(Utility::alpha_fair(0.0).value(3.0) == doctest::Approx(3.0));
  CHECK(Utility::alpha_fair(1.0) == Utility::log());
  CHECK_THROWS_AS(Utility::alpha_fair(-0.5), DomainError);
}

TEST_CASE("derivatives agree with central differences") {
  Rng rng(11);
  const std::vector<Utility> family = {Utility::log(), Utility::rate(), Utility::alpha_fair(0.5),
                                       Utility::alpha_fair(2.0), Utility::alpha_fair(3.7)};
  for (const auto& u : family) {
    for (int k = 0; k < 50; ++k) {
      const double g = std::exp(rng.uniform(std::log(1e-2), std::log(1e2)));
      const double h = 1e-5 * g;
      const double d1 = (u.value(g + h) - u.value(g - h)) / (2 * h);
      const double d2 = (u.d1(g + h) - u.d1(g - h)) / (2 * h);
      CHECK(std::abs(d1 - u.d1(g)) <= 1e-4 * std::abs(u.d1(g)));
      CHECK(std::abs(d2 - u.d2(g)) <= 1e-4 * std::abs(u.d2(g)));
    }
  }
}

TEST_CASE("relative risk aversion") {
  for (double g : {1e-3, 0.5, 7.0, 1e4}) {
    CHECK(relative_risk_aversion(Utility::log(), g) == doctest::Approx(1.0));
    CHECK(relative_risk_aversion(Utility::alpha_fair(2.0), g) == doctest::Approx(2.0));
  }
  const Utility linear = Utility::tabulated([](double g) { return g; }, [](double) { return 1.0; },
                                            [](double) { return 0.0; }, "linear");
  CHECK(relative_risk_aversion(linear, 3.0) == 0.0);
  CHECK(log_concavity_violation(linear).has_value());
  CHECK_FALSE(log_concavity_violation(Utility::log()).has_value());
  CHECK_FALSE(log_concavity_violation(Utility::alpha_fair(1.5)).has_value());
  // Rate has RRA gamma / (1 + gamma) < 1.
  CHECK(log_concavity_violation(Utility::rate()).has_value());
  const Utility falling = Utility::tabulated([](double g) { return -g; }, [](double) { return -1.0; },
                                             [](double) { return 0.0; }, "falling");
  CHECK_THROWS_AS(relative_risk_aversion(falling, 1.0), InvalidUtilityError);
  CHECK_THROWS_AS(relative_risk_aversion(Utility::log(), 0.0), DomainError);
}

TEST_CASE("capacity") {
  CHECK(capacity(0.0) == 0.0);
  CHECK(capacity(1.0) == doctest::Approx(1.0));
  CHECK(capacity(3.0) == doctest::Approx(2.0));
  CHECK(capacity(10.0) > capacity(9.0));
  CHECK_THROWS_AS(capacity(-0.1), DomainError);
}

TEST_CASE("utility spec broadcast and size checks") {
  const UtilitySpec one(Utility::rate());
  CHECK(one.at(5) == Utility::rate());
  CHECK_NOTHROW(one.check_size(7));
  const UtilitySpec two(std::vector<Utility>{Utility::log(), Utility::rate()});
  CHECK(two.at(1) == Utility::rate());
  CHECK_THROWS_AS(two.check_size(3), ModelError);
}
