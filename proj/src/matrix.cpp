#include "pwrctl/matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "pwrctl/error.hpp"
#include "pwrctl/kernels.hpp"

namespace pwrctl {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ModelError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Vector operator*(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) throw ModelError("matrix-vector dimension mismatch");
  Vector y(m.rows());
  kernels::gemv(m.data(), m.rows(), m.cols(), x.data(), nullptr, y.data());
  return y;
}

double inf_norm(std::span<const double> v) {
  double best = 0.0;
  for (double x : v) {
    const double a = std::fabs(x);
    if (!(a <= best)) best = a;
  }
  return best;
}

double inf_norm_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ModelError("vector dimension mismatch");
  return kernels::max_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace pwrctl
