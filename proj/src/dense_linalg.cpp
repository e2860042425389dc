#include "noma/dense_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "noma/errors.hpp"

namespace noma {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidArgument("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

LUFactors lu_factor(Matrix a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw InvalidArgument("lu_factor: matrix is not square");
  for (double v : a.data()) {
    if (!std::isfinite(v)) throw InvalidArgument("lu_factor: non-finite entry");
  }

  LUFactors f{std::move(a), std::vector<std::size_t>(n)};
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  Matrix& lu = f.lu;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > best) {
        best = std::abs(lu(i, k));
        pivot = i;
      }
    }
    if (best == 0.0) throw SingularMatrixError("lu_factor: zero pivot in column " + std::to_string(k));
    if (pivot != k) {
      std::swap_ranges(lu.row(k).begin(), lu.row(k).end(), lu.row(pivot).begin());
      std::swap(f.perm[k], f.perm[pivot]);
    }

    const double inv = 1.0 / lu(k, k);
    const auto pivot_row = lu.row(k);
    for (std::size_t i = k + 1; i < n; ++i) {
      auto row = lu.row(i);
      const double m = row[k] * inv;
      row[k] = m;
      if (m == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) row[j] -= m * pivot_row[j];
    }
  }
  return f;
}

Vector lu_solve(const LUFactors& f, std::span<const double> rhs) {
  const std::size_t n = f.lu.rows();
  if (rhs.size() != n) throw InvalidArgument("lu_solve: dimension mismatch");

  Vector x(n);
  // Forward substitution with the unit lower factor.
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = f.lu.row(i);
    double sum = rhs[f.perm[i]];
    for (std::size_t j = 0; j < i; ++j) sum -= row[j] * x[j];
    x[i] = sum;
  }
  for (std::size_t i = n; i-- > 0;) {
    const auto row = f.lu.row(i);
    double sum = x[i];
    for (std::size_t j = i + 1; j < n; ++j) sum -= row[j] * x[j];
    x[i] = sum / row[i];
  }
  return x;
}

Vector multiply(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw InvalidArgument("multiply: dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    y[i] = std::inner_product(row.begin(), row.end(), x.begin(), 0.0);
  }
  return y;
}

Vector multiply_transposed(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.rows()) throw InvalidArgument("multiply_transposed: dimension mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (x[i] == 0.0) continue;
    const auto row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += row[j] * x[i];
  }
  return y;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("multiply: dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

SparseRows SparseRows::from_dense(const Matrix& a) {
  SparseRows s;
  s.rows = a.rows();
  s.cols = a.cols();
  s.start.reserve(s.rows + 1);
  s.start.push_back(0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] == 0.0) continue;
      s.index.push_back(j);
      s.value.push_back(row[j]);
    }
    s.start.push_back(s.index.size());
  }
  return s;
}

Vector multiply(const SparseRows& a, std::span<const double> x) {
  if (x.size() != a.cols) throw InvalidArgument("multiply: dimension mismatch");
  Vector y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = a.start[i]; k < a.start[i + 1]; ++k) y[i] += a.value[k] * x[a.index[k]];
  return y;
}

Vector multiply_transposed(const SparseRows& a, std::span<const double> x) {
  if (x.size() != a.rows) throw InvalidArgument("multiply_transposed: dimension mismatch");
  Vector y(a.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = a.start[i]; k < a.start[i + 1]; ++k) y[a.index[k]] += a.value[k] * x[i];
  return y;
}

double frobenius_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double frobenius_norm(const Matrix& a) { return frobenius_norm(a.data()); }

}  // namespace noma
