#pragma once

#include <cstddef>

namespace pwrctl::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void gemv_scalar(const double* m, std::size_t rows, std::size_t cols, const double* x,
                 const double* bias, double* out);
double max_abs_diff_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);

#if defined(PWRCTL_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void gemv_avx2(const double* m, std::size_t rows, std::size_t cols, const double* x,
               const double* bias, double* out);
double max_abs_diff_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
#endif

#if defined(PWRCTL_HAVE_NEON)
double dot_neon(const double* a, const double* b, std::size_t n);
void gemv_neon(const double* m, std::size_t rows, std::size_t cols, const double* x,
               const double* bias, double* out);
double max_abs_diff_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double alpha, const double* x, double* y, std::size_t n);
#endif

}  // namespace pwrctl::kernels::detail
