#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "noma/baselines.hpp"
#include "noma/errors.hpp"
#include "noma/pairing_lp.hpp"
#include "oracles.hpp"

using namespace noma;

namespace {

LPData toy_lp(int K, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = static_cast<std::size_t>(K) * (2 * K - 1);
  Vector r(n), p(n), b(n);
  for (std::size_t j = 0; j < n; ++j) {
    r[j] = 5.0 * u(gen);
    p[j] = 0.01 + 0.1 * u(gen);
    b[j] = 0.5 + 0.5 * u(gen);
  }
  const double budget = 0.06 * K + std::accumulate(p.begin(), p.end(), 0.0) / (2.0 * K - 1.0);
  return assemble_lp(K, r, p, b, budget);
}

BarrierState interior_state(const LPData& lp, double t, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  BarrierState s;
  s.t = t;
  s.x.resize(lp.dim);
  for (std::size_t j = 0; j < lp.dim; ++j) s.x[j] = u(gen) * std::min(lp.b[j], 1.0) / static_cast<double>(lp.dim);
  s.w.resize(lp.D.rows());
  for (double& v : s.w) v = u(gen) - 0.5;
  s.y = reciprocal_slacks(lp, s.x);
  return s;
}

double barrier_at(const LPData& lp, const Vector& x, double t) { return barrier_objective(lp, x, t); }

}  // namespace

TEST_SUITE("pairing_lp") {

TEST_CASE("vec_index examples") {
  CHECK(vec_index(1, 2, 1) == 1);
  CHECK(vec_index(1, 2, 5) == 1);
  CHECK(vec_index(2, 3, 2) == 4);
  CHECK(vec_index(3, 4, 2) == 6);
  CHECK_THROWS_AS(vec_index(2, 2, 2), InvalidArgument);
  CHECK_THROWS_AS(vec_index(3, 2, 2), InvalidArgument);
  CHECK_THROWS_AS(vec_index(1, 5, 2), InvalidArgument);
}

TEST_CASE("vec_index enumerates pairs row by row") {
  for (int K = 1; K <= 6; ++K) {
    std::size_t expected = 0;
    for (int m = 1; m <= 2 * K; ++m)
      for (int n = m + 1; n <= 2 * K; ++n) {
        ++expected;
        CHECK(vec_index(m, n, K) == expected);
        CHECK(pair_at(expected, K) == std::pair{m, n});
      }
    CHECK(expected == static_cast<std::size_t>(K * (2 * K - 1)));
    CHECK_THROWS_AS(pair_at(expected + 1, K), InvalidArgument);
  }
}

TEST_CASE("single pair LP shape") {
  const Scenario sc = oracle::scenario(1, 3);
  const auto cands = allocate_at_price(candidate_pairs(sc), 1e-3, sc.noise_power);
  const LPData lp = build_lp(sc, cands);
  CHECK(lp.dim == 1);
  CHECK(lp.D.rows() == 2);
  CHECK(lp.D.cols() == 1);
  CHECK(lp.D(0, 0) == 1.0);
  CHECK(lp.D(1, 0) == 1.0);
  CHECK(lp.A.rows() == 3);
  CHECK(lp.A.cols() == 1);
}

TEST_CASE("LP structure on a scenario instance") {
  const Scenario sc = oracle::scenario(3, 9);
  const LPData lp = oracle::scenario_lp(sc);
  const std::size_t n = lp.dim;
  REQUIRE(n == 15);
  REQUIRE(lp.A.rows() == 2 * n + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(lp.A(i, j) == (i == j ? 1.0 : 0.0));
      CHECK(lp.A(n + i, j) == (i == j ? -1.0 : 0.0));
    }
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(lp.A(2 * n, j) == lp.p[j]);
    CHECK(lp.u[j] == lp.b[j]);
    CHECK(lp.u[n + j] == 0.0);
    CHECK(lp.b[j] > 0.0);
    CHECK(lp.b[j] <= 1.0);
    double col = 0.0;
    for (std::size_t k = 0; k < lp.D.rows(); ++k) col += lp.D(k, j);
    CHECK(col == 2.0);
    const auto [m, q] = pair_at(j + 1, 3);
    CHECK(lp.D(static_cast<std::size_t>(m - 1), j) == 1.0);
    CHECK(lp.D(static_cast<std::size_t>(q - 1), j) == 1.0);
  }
  CHECK(lp.u[2 * n] == sc.budget);
}

TEST_CASE("a candidate with zero orthogonal-access rate gets the vacuous cap") {
  const Scenario sc = oracle::scenario(2, 5);
  auto cands = allocate_at_price(candidate_pairs(sc), 1e-2, sc.noise_power);
  cands[2] = allocate_pair(cands[2].pair, 0.0, sc.noise_power);
  const LPData lp = build_lp(sc, cands);
  const int lo = std::min(cands[2].pair.far, cands[2].pair.near);
  const int hi = std::max(cands[2].pair.far, cands[2].pair.near);
  CHECK(lp.b[vec_index(lo, hi, 2) - 1] == 1.0);

  auto missing = cands;
  missing.pop_back();
  CHECK_THROWS_AS(build_lp(sc, missing), InvalidArgument);
}

TEST_CASE("barrier gradient matches finite differences on a one-variable toy") {
  const LPData lp = assemble_lp(1, {2.0}, {1.0}, {1.0}, 3.0);
  for (double x : {0.1, 0.37, 0.8}) {
    BarrierState s;
    s.x = {x};
    s.t = 4.0;
    s.w = {0.0, 0.0};
    const GradientHessian gh = barrier_gradient_hessian(lp, s);
    const double fd = oracle::central_difference([&](double v) { return barrier_at(lp, {v}, 4.0); }, x, 1e-6);
    CHECK(oracle::rel_diff(gh.gradient[0], fd) < 1e-6);
    const double fd2 = oracle::central_difference(
        [&](double v) {
          BarrierState q = s;
          q.x = {v};
          return barrier_gradient_hessian(lp, q).gradient[0];
        },
        x, 1e-6);
    CHECK(oracle::rel_diff(gh.hessian(0, 0), fd2) < 1e-5);
  }
}

TEST_CASE("barrier gradient and Hessian match finite differences for K = 2") {
  const LPData lp = toy_lp(2, 77);
  const BarrierState s = interior_state(lp, 3.0, 5);
  const GradientHessian gh = barrier_gradient_hessian(lp, s);
  for (std::size_t j = 0; j < lp.dim; ++j) {
    const double h = 1e-6 * s.x[j];
    auto along = [&](double v) {
      Vector x = s.x;
      x[j] = v;
      return barrier_at(lp, x, s.t);
    };
    CHECK(oracle::rel_diff(gh.gradient[j], oracle::central_difference(along, s.x[j], h)) < 1e-5);
    for (std::size_t k = 0; k < lp.dim; ++k) {
      auto grad_k = [&](double v) {
        BarrierState q = s;
        q.x[j] = v;
        return barrier_gradient_hessian(lp, q).gradient[k];
      };
      const double fd = oracle::central_difference(grad_k, s.x[j], h);
      CHECK(std::fabs(gh.hessian(k, j) - fd) <= 1e-5 * std::max(1.0, std::fabs(gh.hessian(j, j))));
    }
  }
}

TEST_CASE("doubling t doubles the linear part of the gradient") {
  const LPData lp = toy_lp(2, 3);
  BarrierState s = interior_state(lp, 2.5, 1);
  const Vector g1 = barrier_gradient_hessian(lp, s).gradient;
  s.t = 5.0;
  const Vector g2 = barrier_gradient_hessian(lp, s).gradient;
  for (std::size_t j = 0; j < lp.dim; ++j) CHECK(g2[j] - g1[j] == doctest::Approx(-2.5 * lp.r_s[j]).epsilon(1e-12));
}

TEST_CASE("residual matches an independent recomputation") {
  const LPData lp = assemble_lp(1, {1.5}, {0.2}, {0.9}, 1.0);
  BarrierState s;
  s.x = {0.4};
  s.t = 7.0;
  s.w = {0.3, -1.1};
  const Residual r = residual_J(lp, s);
  const double y1 = 1.0 / (0.9 - 0.4), y2 = 1.0 / 0.4, y3 = 1.0 / (1.0 - 0.2 * 0.4);
  const double dual = -7.0 * 1.5 + y1 - y2 + 0.2 * y3 + 0.3 - 1.1;
  const double primal = 0.4 - 1.0;
  CHECK(r.dual[0] == doctest::Approx(dual).epsilon(1e-14));
  CHECK(r.primal[0] == doctest::Approx(primal));
  CHECK(r.primal[1] == doctest::Approx(primal));
  CHECK(r.norm == doctest::Approx(std::sqrt(dual * dual + 2 * primal * primal)).epsilon(1e-14));

  s.x = {1.0};
  const LPData wide = assemble_lp(1, {1.5}, {0.2}, {1.0}, 1.0);
  CHECK_THROWS_AS(residual_J(wide, s), InteriorViolation);
}

TEST_CASE("points on D x = 1 have zero primal residual") {
  const LPData lp = toy_lp(2, 8);
  BarrierState s;
  s.x.assign(lp.dim, 1.0 / 3.0);
  s.w.assign(4, 0.0);
  s.t = 1.0;
  const Residual r = residual_J(lp, s);
  for (double v : r.primal) CHECK(std::fabs(v) <= 1e-15);
}

TEST_CASE("Newton step agrees with an explicitly inverted KKT system") {
  const LPData lp = toy_lp(2, 12);
  const BarrierState s = interior_state(lp, 2.0, 4);
  const GradientHessian gh = barrier_gradient_hessian(lp, s);
  const Matrix kkt = kkt_matrix(lp, gh.hessian);
  const std::size_t n = lp.dim, e = lp.D.rows();
  std::vector<std::vector<double>> dense(n + e, std::vector<double>(n + e));
  for (std::size_t i = 0; i < n + e; ++i)
    for (std::size_t j = 0; j < n + e; ++j) dense[i][j] = kkt(i, j);
  const auto inv = oracle::inverse(dense);
  Vector rhs(n + e);
  const Vector dx = multiply(lp.D, s.x);
  for (std::size_t j = 0; j < n; ++j) rhs[j] = -gh.gradient[j];
  for (std::size_t k = 0; k < e; ++k) rhs[n + k] = -(dx[k] - 1.0);
  Vector sol(n + e, 0.0);
  for (std::size_t i = 0; i < n + e; ++i)
    for (std::size_t j = 0; j < n + e; ++j) sol[i] += inv[i][j] * rhs[j];

  const NewtonStep step = newton_step(lp, s);
  for (std::size_t j = 0; j < n; ++j) CHECK(std::fabs(step.dx[j] - sol[j]) <= 1e-8 * (1.0 + std::fabs(sol[j])));
  for (std::size_t k = 0; k < e; ++k)
    CHECK(std::fabs(s.w[k] + step.dw[k] - sol[n + k]) <= 1e-8 * (1.0 + std::fabs(sol[n + k])));
}

TEST_CASE("Newton step vanishes at a centered point and converges quadratically nearby") {
  const LPData lp = toy_lp(3, 21);
  BarrierParams bp;
  bp.epsilon = 1.0;  // stop after a few centerings
  const BarrierResult r = barrier_solve(lp, bp);
  BarrierState s;
  s.x = r.x;
  s.w = r.w;
  s.t = r.diagnostics.final_t;
  s.y = reciprocal_slacks(lp, s.x);
  const NewtonStep at = newton_step(lp, s);
  CHECK(frobenius_norm(at.dx) <= 1e-8);
  CHECK(frobenius_norm(at.dw) <= 1e-8 * std::max(1.0, frobenius_norm(s.w)));

  BarrierState near = s;
  for (std::size_t j = 0; j < lp.dim; ++j) near.x[j] *= 1.0 + 1e-4 * ((j % 3) - 1.0);
  const double before = residual_J(lp, near).norm;
  const NewtonStep step = newton_step(lp, near);
  for (std::size_t j = 0; j < lp.dim; ++j) near.x[j] += step.dx[j];
  for (std::size_t k = 0; k < near.w.size(); ++k) near.w[k] += step.dw[k];
  const double after = residual_J(lp, near).norm;
  CHECK(after < 1e-2 * before);
}

TEST_CASE("line search") {
  const LPData lp = toy_lp(2, 31);
  BarrierParams bp;
  BarrierState s;
  s.x.assign(lp.dim, 1.0 / 3.0);
  s.w.assign(lp.D.rows(), 0.0);
  s.t = 1.0;
  s.y = reciprocal_slacks(lp, s.x);

  const NewtonStep zero{Vector(lp.dim, 0.0), Vector(lp.D.rows(), 0.0)};
  CHECK(line_search(lp, s, zero, bp) == 1.0);

  s.t = 1e4;
  const NewtonStep step = newton_step(lp, s);
  const double sstep = line_search(lp, s, step, bp);
  CHECK(sstep < 1.0);
  Vector x = s.x;
  for (std::size_t j = 0; j < lp.dim; ++j) x[j] += sstep * step.dx[j];
  CHECK(min_slack(lp, x) > 0.0);
}

TEST_CASE("one pair is forced") {
  const LPData lp = assemble_lp(1, {2.75}, {0.05}, {1.0}, 0.1);
  const BarrierResult r = barrier_solve(lp);
  REQUIRE(r.x.size() == 1);
  CHECK(r.x[0] == 1.0);
  CHECK(r.objective == 2.75);
}

TEST_CASE("barrier and Simplex agree on random scenario LPs") {
  for (int K = 2; K <= 4; ++K)
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
      const LPData lp = oracle::scenario_lp(oracle::scenario(K, seed * 7919 + K));
      const BarrierResult b = barrier_solve(lp);
      const SimplexResult sx = simplex_solve(lp);
      CHECK(oracle::rel_diff(b.objective, sx.objective) < 1e-4);

      const Vector dx = multiply(lp.D, b.x);
      for (double v : dx) CHECK(std::fabs(v - 1.0) <= 1e-6);
      for (std::size_t j = 0; j < lp.dim; ++j) {
        CHECK(b.x[j] >= 0.0);
        CHECK(b.x[j] <= lp.b[j] + 1e-8);
      }
    }
}

TEST_CASE("iterates stay interior and the residual drops at every accepted step") {
  for (int K = 2; K <= 4; ++K)
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const LPData lp = oracle::scenario_lp(oracle::scenario(K, seed * 31 + K));
      const BarrierResult r = barrier_solve(lp);
      const auto& tr = r.diagnostics.trace;
      REQUIRE(!tr.empty());
      for (std::size_t i = 0; i < tr.size(); ++i) {
        CHECK(tr[i].min_slack > 0.0);
        CHECK(tr[i].step > 0.0);
        CHECK(tr[i].step <= 1.0);
        if (i > 0 && tr[i].t == tr[i - 1].t) CHECK(tr[i].residual < tr[i - 1].residual);
      }
    }
}

TEST_CASE("number of t updates follows the closed form") {
  struct Case {
    double eps, xi, t0;
    int K;
  };
  for (const Case c : {Case{1e-6, 10.0, 1.0, 2}, Case{1e-3, 4.0, 1.0, 3}, Case{1e-2, 20.0, 0.5, 4},
                       Case{1e-4, 8.0, 2.0, 2}, Case{1e-5, 10.0, 1.0, 3}, Case{1e8, 10.0, 1.0, 4}}) {
    const double m = c.K * (2.0 * c.K - 1.0);
    const int expected = std::max(0, static_cast<int>(std::ceil(std::log(m / (c.eps * c.t0)) / std::log(c.xi))));
    BarrierParams bp;
    bp.epsilon = c.eps;
    bp.xi = c.xi;
    bp.t0 = c.t0;
    const LPData lp = oracle::scenario_lp(oracle::scenario(c.K, 1000 + c.K));
    const BarrierResult r = barrier_solve(lp, bp);
    REQUIRE(!r.diagnostics.power_row_tight);
    CHECK(r.diagnostics.updates == expected);
    CHECK(predicted_updates(c.K, c.eps, c.t0, c.xi) == expected);
    CHECK(m / r.diagnostics.final_t < c.eps);
  }
}

TEST_CASE("parameter validation") {
  BarrierParams bp;
  CHECK_NOTHROW(bp.validate());
  bp.zeta = 0.5;
  CHECK_THROWS_AS(bp.validate(), InvalidArgument);
  bp = BarrierParams{};
  bp.xi = 1.0;
  CHECK_THROWS_AS(bp.validate(), InvalidArgument);
  bp = BarrierParams{};
  bp.tau = 1.0;
  CHECK_THROWS_AS(bp.validate(), InvalidArgument);
}

}  // TEST_SUITE
