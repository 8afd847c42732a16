#include "kernels/variants.hpp"

#include <arm_neon.h>

#include <cmath>

namespace pwrctl::kernels::detail {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc = std::fma(a[i], b[i], acc);
  return acc;
}

void gemv_neon(const double* m, std::size_t rows, std::size_t cols, const double* x,
               const double* bias, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double acc = dot_neon(m + r * cols, x, cols);
    out[r] = bias ? acc + bias[r] : acc;
  }
}

double max_abs_diff_neon(const double* a, const double* b, std::size_t n) {
  double result = 0.0;
  float64x2_t best = vdupq_n_f64(0.0);
  std::size_t i = 0;
  bool nan_seen = false;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    // vmaxq_f64 propagates NaN, but check explicitly to match the scalar contract.
    const uint64x2_t ordered = vceqq_f64(d, d);
    nan_seen |= (vgetq_lane_u64(ordered, 0) & vgetq_lane_u64(ordered, 1)) == 0;
    best = vmaxq_f64(best, d);
  }
  if (nan_seen) return std::nan("");
  result = vmaxvq_f64(best);
  for (; i < n; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (std::isnan(d)) return d;
    if (d > result) result = d;
  }
  return result;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

}  // namespace pwrctl::kernels::detail
