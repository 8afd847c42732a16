#include "kernels/variants.hpp"

#include <cmath>

namespace pwrctl::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemv_scalar(const double* m, std::size_t rows, std::size_t cols, const double* x,
                 const double* bias, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = dot_scalar(m + r * cols, x, cols);
    out[r] = bias ? acc + bias[r] : acc;
  }
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    // NaN must propagate so divergence checks see it.
    if (std::isnan(d)) return d;
    if (d > best) best = d;
  }
  return best;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace pwrctl::kernels::detail
