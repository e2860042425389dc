#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace noma {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Compressed-row copy of a mostly-zero matrix, for repeated products.
struct SparseRows {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> start;  ///< rows + 1 offsets into index/value
  std::vector<std::size_t> index;
  std::vector<double> value;

  static SparseRows from_dense(const Matrix& a);
};

Vector multiply(const SparseRows& a, std::span<const double> x);
Vector multiply_transposed(const SparseRows& a, std::span<const double> x);

/// Combined storage of a partially pivoted factorization P A = L U.
/// L is unit lower triangular (strictly-lower part of `lu`), U is the upper
/// triangle. perm[i] is the row of A that ended up in row i.
struct LUFactors {
  Matrix lu;
  std::vector<std::size_t> perm;
};

/// Throws SingularMatrixError on a zero pivot.
LUFactors lu_factor(Matrix a);
Vector lu_solve(const LUFactors& f, std::span<const double> rhs);

Vector multiply(const Matrix& a, std::span<const double> x);
/// a^T x
Vector multiply_transposed(const Matrix& a, std::span<const double> x);
Matrix multiply(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);
double frobenius_norm(std::span<const double> v);

}  // namespace noma
