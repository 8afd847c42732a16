#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "pwrctl/kernels.hpp"
#include "pwrctl/matrix.hpp"
#include "pwrctl/rng.hpp"

using namespace pwrctl;

namespace {

std::vector<double> random(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Long-double reference with a bound on the rounding error of any summation order.
double dot_ref(const std::vector<double>& a, const std::vector<double>& b, double* bound) {
  long double s = 0.0L;
  double mag = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<long double>(a[i]) * b[i];
    mag += std::abs(a[i] * b[i]);
  }
  *bound = 2.0 * static_cast<double>(a.size() + 1) * std::numeric_limits<double>::epsilon() * mag;
  return static_cast<double>(s);
}

std::vector<kernels::Isa> variants() {
  std::vector<kernels::Isa> out{kernels::Isa::Scalar};
  for (auto isa : {kernels::Isa::Avx2, kernels::Isa::Neon})
    if (kernels::available(isa)) out.push_back(isa);
  return out;
}

}  // namespace

TEST_CASE("every kernel variant matches the long-double reference for dot") {
  Rng rng(1);
  for (auto isa : variants()) {
    const auto& t = kernels::table(isa);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 31u, 64u, 257u}) {
      auto a = random(rng, n), b = random(rng, n);
      double bound = 0.0;
      const double want = dot_ref(a, b, &bound);
      CHECK(std::abs(t.dot(a.data(), b.data(), n) - want) <= bound);
    }
  }
}

TEST_CASE("gemv variants agree with scalar row dots and the bias") {
  Rng rng(2);
  const auto& ref = kernels::scalar_table();
  for (auto isa : variants()) {
    const auto& t = kernels::table(isa);
    for (std::size_t rows : {1u, 2u, 5u, 13u})
      for (std::size_t cols : {1u, 3u, 4u, 9u, 17u}) {
        auto m = random(rng, rows * cols), x = random(rng, cols), bias = random(rng, rows);
        std::vector<double> out(rows), want(rows);
        t.gemv(m.data(), rows, cols, x.data(), bias.data(), out.data());
        ref.gemv(m.data(), rows, cols, x.data(), bias.data(), want.data());
        for (std::size_t r = 0; r < rows; ++r) {
          double bound = 0.0;
          std::vector<double> row(m.begin() + r * cols, m.begin() + (r + 1) * cols);
          dot_ref(row, x, &bound);
          CHECK(std::abs(out[r] - want[r]) <= 2.0 * bound + 4e-16 * std::abs(bias[r]));
          // Each row is its own dot plus bias, so rows evaluated alone agree bitwise.
          CHECK(out[r] == t.dot(row.data(), x.data(), cols) + bias[r]);
        }
        t.gemv(m.data(), rows, cols, x.data(), nullptr, out.data());
        for (std::size_t r = 0; r < rows; ++r)
          CHECK(out[r] == t.dot(m.data() + r * cols, x.data(), cols));
      }
  }
}

TEST_CASE("max_abs_diff is exact in every variant and propagates NaN") {
  Rng rng(3);
  for (auto isa : variants()) {
    const auto& t = kernels::table(isa);
    for (std::size_t n : {1u, 4u, 5u, 33u}) {
      auto a = random(rng, n), b = random(rng, n);
      double want = 0.0;
      for (std::size_t i = 0; i < n; ++i) want = std::max(want, std::abs(a[i] - b[i]));
      CHECK(t.max_abs_diff(a.data(), b.data(), n) == want);
      a[n / 2] = std::numeric_limits<double>::quiet_NaN();
      CHECK(std::isnan(t.max_abs_diff(a.data(), b.data(), n)));
    }
    CHECK(t.max_abs_diff(nullptr, nullptr, 0) == 0.0);
  }
}

TEST_CASE("axpy variants match scalar to one rounding") {
  Rng rng(4);
  for (auto isa : variants()) {
    const auto& t = kernels::table(isa);
    for (std::size_t n : {1u, 6u, 19u}) {
      auto x = random(rng, n), y = random(rng, n);
      auto y2 = y;
      t.axpy(0.7, x.data(), y.data(), n);
      kernels::scalar_table().axpy(0.7, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(y2[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("select switches the active table and matrix products follow it") {
  const auto before = kernels::active().isa;
  const Matrix m{{1.0, 2.0}, {3.0, 4.0}};
  const std::vector<double> x{1.0, -1.0};
  for (auto isa : variants()) {
    kernels::select(isa);
    CHECK(kernels::active().isa == isa);
    const auto y = m * x;
    CHECK(y == std::vector<double>{-1.0, -1.0});
  }
  kernels::select(before);
  CHECK(kernels::name(kernels::Isa::Scalar) == "scalar");
}
