#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "noma/dense_linalg.hpp"
#include "noma/errors.hpp"

using namespace noma;

namespace {

Matrix reconstruct_permuted(const LUFactors& f, const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix diff(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= std::min(i, j); ++k) s += (k == i ? 1.0 : f.lu(i, k)) * f.lu(k, j);
      diff(i, j) = s - a(f.perm[i], j);
    }
  return diff;
}

}  // namespace

TEST_SUITE("dense_linalg") {

TEST_CASE("identity factors trivially") {
  const Matrix a = Matrix::identity(4);
  const LUFactors f = lu_factor(a);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(f.perm[i] == i);
    for (std::size_t j = 0; j < 4; ++j) CHECK(f.lu(i, j) == (i == j ? 1.0 : 0.0));
  }
  const Vector x = lu_solve(f, Vector{3.0, 4.0, 5.0, 6.0});
  CHECK(x == Vector{3.0, 4.0, 5.0, 6.0});
}

TEST_CASE("2x2 hand example") {
  const Matrix a{{2.0, 1.0}, {1.0, 3.0}};
  const LUFactors f = lu_factor(a);
  CHECK(frobenius_norm(reconstruct_permuted(f, a)) <= 1e-14);
  const Vector x = lu_solve(f, Vector{3.0, 4.0});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("singular matrix is reported") {
  CHECK_THROWS_AS(lu_factor(Matrix{{0.0, 1.0}, {0.0, 0.0}}), SingularMatrixError);
  CHECK_THROWS_AS(lu_factor(Matrix(2, 3)), InvalidArgument);
}

TEST_CASE("dimension mismatch in solve") {
  const LUFactors f = lu_factor(Matrix::identity(3));
  CHECK_THROWS_AS(lu_solve(f, Vector{1.0, 2.0}), InvalidArgument);
}

TEST_CASE("pivoting handles a zero leading entry") {
  const Matrix a{{0.0, 2.0, 1.0}, {1.0, 1.0, 0.0}, {3.0, 0.0, 1.0}};
  const LUFactors f = lu_factor(a);
  CHECK(frobenius_norm(reconstruct_permuted(f, a)) <= 1e-14 * frobenius_norm(a));
  const Vector x = lu_solve(f, Vector{5.0, 3.0, 6.0});
  const Vector ax = multiply(a, x);
  CHECK(ax[0] == doctest::Approx(5.0));
  CHECK(ax[1] == doctest::Approx(3.0));
  CHECK(ax[2] == doctest::Approx(6.0));
}

TEST_CASE("random 50x50 system recovers the known solution") {
  std::mt19937_64 gen(101);
  std::normal_distribution<double> nd;
  const std::size_t n = 50;
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = nd(gen);
    a(i, i) += 10.0;
  }
  Vector x(n);
  for (double& v : x) v = nd(gen);
  const Vector rhs = multiply(a, x);
  const LUFactors f = lu_factor(a);

  std::vector<std::size_t> sorted = f.perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n; ++i) CHECK(sorted[i] == i);
  CHECK(frobenius_norm(reconstruct_permuted(f, a)) <= 1e-10 * frobenius_norm(a));

  const Vector got = lu_solve(f, rhs);
  Vector err(n);
  for (std::size_t i = 0; i < n; ++i) err[i] = got[i] - x[i];
  CHECK(frobenius_norm(err) <= 1e-8 * frobenius_norm(x));
  const Vector back = multiply(a, got);
  Vector res(n);
  for (std::size_t i = 0; i < n; ++i) res[i] = back[i] - rhs[i];
  CHECK(frobenius_norm(res) <= 1e-8 * (frobenius_norm(a) * frobenius_norm(got) + frobenius_norm(rhs)));
}

TEST_CASE("ill-conditioned solve stays within the residual bound") {
  // Hilbert-like matrix of order 8 has a condition number near 1e10; order 6
  // is about 1.5e7.
  const std::size_t n = 6;
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 1.0 / static_cast<double>(i + j + 1);
  const Vector rhs(n, 1.0);
  const Vector x = lu_solve(lu_factor(a), rhs);
  const Vector ax = multiply(a, x);
  Vector res(n);
  for (std::size_t i = 0; i < n; ++i) res[i] = ax[i] - rhs[i];
  CHECK(frobenius_norm(res) <= 1e-8 * (frobenius_norm(a) * frobenius_norm(x) + frobenius_norm(rhs)));
}

TEST_CASE("products and norms") {
  const Matrix a{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  const Vector ax = multiply(a, Vector{1.0, -1.0});
  CHECK(ax == Vector{-1.0, -1.0, -1.0});
  const Vector aty = multiply_transposed(a, Vector{1.0, 0.0, 1.0});
  CHECK(aty == Vector{6.0, 8.0});
  const Matrix b = multiply(a, Matrix{{1.0, 0.0}, {0.0, 2.0}});
  CHECK(b(2, 1) == 12.0);
  CHECK(frobenius_norm(a) == doctest::Approx(std::sqrt(91.0)));
  CHECK(frobenius_norm(Vector{3.0, 4.0}) == doctest::Approx(5.0));
}

TEST_CASE("compressed rows give the same products as dense storage") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a(9, 7);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 7; ++j)
      if ((i * 7 + j) % 3 == 0) a(i, j) = u(gen);
  const SparseRows s = SparseRows::from_dense(a);
  CHECK(s.start.size() == 10);
  Vector x(7), y(9);
  for (double& v : x) v = u(gen);
  for (double& v : y) v = u(gen);
  const Vector d1 = multiply(a, x), s1 = multiply(s, x);
  const Vector d2 = multiply_transposed(a, y), s2 = multiply_transposed(s, y);
  for (std::size_t i = 0; i < 9; ++i) CHECK(s1[i] == doctest::Approx(d1[i]).epsilon(1e-15));
  for (std::size_t j = 0; j < 7; ++j) CHECK(s2[j] == doctest::Approx(d2[j]).epsilon(1e-15));
}

}  // TEST_SUITE
