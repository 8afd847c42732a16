#pragma once

#include <cstddef>
#include <string_view>

namespace pwrctl::kernels {

/// Instruction-set variants of the dense inner loops.
enum class Isa { Scalar, Avx2, Neon };

std::string_view name(Isa isa);

/// Function table for one ISA. Every variant computes the same quantities;
/// reductions may differ from the scalar reference in the last bits because
/// lanes are summed in a different order.
struct Table {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// out[r] = sum_c m[r*cols + c] * x[c] + bias[r]; bias may be null.
  void (*gemv)(const double* m, std::size_t rows, std::size_t cols, const double* x,
               const double* bias, double* out);
  /// max_i |a[i] - b[i]|. Exact in every variant.
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const Table& scalar_table();
bool available(Isa isa);
const Table& table(Isa isa);

/// Currently selected table. Chosen once from CPU features at startup;
/// the PWRCTL_KERNELS environment variable ("scalar", "avx2", "neon") overrides.
const Table& active();

/// Force a variant. Not thread-safe; intended for tests and benchmarks.
void select(Isa isa);

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void gemv(const double* m, std::size_t rows, std::size_t cols, const double* x,
                 const double* bias, double* out) {
  active().gemv(m, rows, cols, x, bias, out);
}
inline double max_abs_diff(const double* a, const double* b, std::size_t n) {
  return active().max_abs_diff(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }

}  // namespace pwrctl::kernels
