#include "noma/pairing_lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "noma/errors.hpp"

namespace noma {

namespace {

constexpr double kMinStep = 1e-12;
// Cap ratios this close to one are treated as exactly one (rounding of the
// binding rate-parity constraint).
constexpr double kCapSnap = 1e-9;
// Relative margin by which the cheapest assignment must undercut the budget
// for the power row to count as having a strict interior.
constexpr double kPowerRowMargin = 1e-6;
// Near a tight row the slack 1/y is resolved only to about one ulp of the
// row bound, so the dual residual has a floor of roughly eps * y^2 * ulp.
// A centering whose line search cannot move is accepted if it is this close.
constexpr double kStallTolerance = 1e-6;

LPData assemble(int num_pairs, Vector r_s, Vector p, Vector b, double budget, bool power_row) {
  const std::size_t n = static_cast<std::size_t>(num_pairs) * (2 * static_cast<std::size_t>(num_pairs) - 1);
  if (r_s.size() != n || p.size() != n || b.size() != n) throw InvalidArgument("assemble_lp: vector size mismatch");

  LPData lp;
  lp.num_pairs = num_pairs;
  lp.dim = n;
  lp.budget = budget;
  const std::size_t rows = 2 * n + (power_row ? 1 : 0);
  lp.A = Matrix(rows, n);
  lp.u.assign(rows, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    lp.A(i, i) = 1.0;
    lp.u[i] = b[i];
    lp.A(n + i, i) = -1.0;
  }
  if (power_row) {
    for (std::size_t j = 0; j < n; ++j) lp.A(2 * n, j) = p[j];
    lp.u[2 * n] = budget;
  }

  const int users = 2 * num_pairs;
  lp.D = Matrix(static_cast<std::size_t>(users), n);
  for (int m = 1; m <= users; ++m) {
    for (int k = m + 1; k <= users; ++k) {
      const std::size_t col = vec_index(m, k, num_pairs) - 1;
      lp.D(static_cast<std::size_t>(m - 1), col) = 1.0;
      lp.D(static_cast<std::size_t>(k - 1), col) = 1.0;
    }
  }
  lp.A_rows = SparseRows::from_dense(lp.A);
  lp.D_rows = SparseRows::from_dense(lp.D);
  lp.r_s = std::move(r_s);
  lp.p = std::move(p);
  lp.b = std::move(b);
  return lp;
}

Vector slacks(const LPData& lp, std::span<const double> x) {
  Vector ax = multiply(lp.A_rows, x);
  for (std::size_t i = 0; i < ax.size(); ++i) ax[i] = lp.u[i] - ax[i];
  return ax;
}

Vector gradient_at(const LPData& lp, std::span<const double> y, double t) {
  Vector g = multiply_transposed(lp.A_rows, y);
  for (std::size_t j = 0; j < lp.dim; ++j) g[j] -= t * lp.r_s[j];
  return g;
}

struct ResidualNorms {
  double total = 0.0;
  double primal = 0.0;
  double scale = 0.0;  // ||A^T y|| + ||t r_s|| + ||D^T w||
};

ResidualNorms residual_norms(const LPData& lp, std::span<const double> x, std::span<const double> w,
                             std::span<const double> y, double t) {
  const Vector aty = multiply_transposed(lp.A_rows, y);
  const Vector dtw = multiply_transposed(lp.D_rows, w);
  Vector dual(aty.size());
  for (std::size_t j = 0; j < dual.size(); ++j) dual[j] = aty[j] - t * lp.r_s[j] + dtw[j];
  Vector primal = multiply(lp.D_rows, x);
  for (double& v : primal) v -= 1.0;
  const double pn = frobenius_norm(primal);
  const double dn = frobenius_norm(dual);
  const double scale = frobenius_norm(aty) + t * frobenius_norm(lp.r_s) + frobenius_norm(dtw);
  return {std::sqrt(dn * dn + pn * pn), pn, scale};
}

double objective_value(const LPData& lp, std::span<const double> x) {
  return std::inner_product(lp.r_s.begin(), lp.r_s.end(), x.begin(), 0.0);
}

// Strictly feasible-for-inequalities start x = theta * 1.
double start_scale(const LPData& lp) {
  double theta = 1.0 / (2.0 * lp.num_pairs - 1.0);
  for (std::size_t i = 0; i < lp.A.rows(); ++i) {
    const auto row = lp.A.row(i);
    const double row_sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (row_sum > 0.0) theta = std::min(theta, lp.u[i] / row_sum);
  }
  if (!(theta > 0.0)) throw InfeasibleError("barrier: no strictly feasible starting scale");
  return 0.5 * theta;
}

// `done`, when given, replaces the epsilon test. It is asked after every
// centering and, with centered = false, after each step that lands on D x = 1.
BarrierResult run_barrier(const LPData& lp, const BarrierParams& params, const Vector* start = nullptr,
                          const std::function<bool(const BarrierState&, bool centered)>& done = {}) {
  const std::size_t n = lp.dim;
  const double m = static_cast<double>(n);
  BarrierResult result;
  auto& diag = result.diagnostics;

  BarrierState state;
  if (start)
    state.x = *start;
  else
    state.x.assign(n, start_scale(lp));
  state.w.assign(lp.D.rows(), 0.0);
  state.t = params.t0;
  state.y = reciprocal_slacks(lp, state.x);
  diag.kappa = residual_J(lp, state).norm;

  bool stop = false;
  while (!stop) {
    int newton = 0;
    for (;;) {
      const ResidualNorms r = residual_norms(lp, state.x, state.w, state.y, state.t);
      const double scale = std::max(1.0, r.scale);
      if (r.total <= params.rho * scale && r.primal <= params.rho) break;
      if (newton >= params.max_newton)
        throw ConvergenceError("barrier: centering did not converge at t = " + std::to_string(state.t) +
                               " (||J|| = " + std::to_string(r.total) + ")");

      const NewtonStep step = newton_step(lp, state);
      double s = 0.0;
      try {
        s = line_search(lp, state, step, params);
      } catch (const LineSearchFailure&) {
        if (r.total > kStallTolerance * scale || r.primal > std::max(params.rho, kStallTolerance)) throw;
        ++diag.stalled_centerings;
        break;
      }
      for (std::size_t j = 0; j < n; ++j) state.x[j] += s * step.dx[j];
      for (std::size_t k = 0; k < state.w.size(); ++k) state.w[k] += s * step.dw[k];
      state.y = reciprocal_slacks(lp, state.x);

      ++newton;
      ++diag.newton_iterations;
      (s < 1.0 ? diag.damped_steps : diag.full_steps) += 1;
      diag.line_search_steps += static_cast<int>(std::lround(std::log(s) / std::log(params.tau)));
      const ResidualNorms after = residual_norms(lp, state.x, state.w, state.y, state.t);
      diag.trace.push_back(TraceRow{state.updates, state.t, after.total, s, min_slack(lp, state.x)});
      if (done && after.primal <= params.rho && done(state, false)) {
        stop = true;
        break;
      }
    }
    diag.newton_per_centering.push_back(newton);

    if (stop || (done ? done(state, true) : m / state.t < params.epsilon)) break;
    if (state.updates >= params.max_updates)
      throw ConvergenceError("barrier: accuracy not reached after " + std::to_string(state.updates) + " updates");
    state.t *= params.xi;
    ++state.updates;
  }

  diag.updates = state.updates;
  diag.final_t = state.t;
  result.x = std::move(state.x);
  result.w = std::move(state.w);
  result.objective = objective_value(lp, result.x);
  return result;
}

}  // namespace

std::size_t vec_index(int m, int n, int num_pairs) {
  if (num_pairs < 1 || m < 1 || n <= m || n > 2 * num_pairs)
    throw InvalidArgument("vec_index: need 1 <= m < n <= 2K");
  const auto mm = static_cast<std::size_t>(m);
  const auto kk = static_cast<std::size_t>(num_pairs);
  return (4 * kk - mm) * (mm - 1) / 2 + static_cast<std::size_t>(n - m);
}

std::pair<int, int> pair_at(std::size_t index, int num_pairs) {
  const int users = 2 * num_pairs;
  std::size_t base = 0;
  for (int m = 1; m < users; ++m) {
    const auto row_len = static_cast<std::size_t>(users - m);
    if (index > base && index <= base + row_len) return {m, m + static_cast<int>(index - base)};
    base += row_len;
  }
  throw InvalidArgument("pair_at: index out of range");
}

std::vector<OrderedPair> candidate_pairs(const Scenario& scenario) {
  const int users = scenario.num_users();
  std::vector<OrderedPair> out;
  out.reserve(static_cast<std::size_t>(users * (users - 1) / 2));
  for (int m = 1; m <= users; ++m)
    for (int n = m + 1; n <= users; ++n) out.push_back(OrderedPair::make(m, scenario.gain(m), n, scenario.gain(n)));
  return out;
}

LPData assemble_lp(int num_pairs, Vector r_s, Vector p, Vector b, double budget) {
  return assemble(num_pairs, std::move(r_s), std::move(p), std::move(b), budget, true);
}

LPData build_lp(const Scenario& scenario, std::span<const PairAllocation> candidates) {
  const int K = scenario.num_pairs();
  const std::size_t n = static_cast<std::size_t>(K) * (2 * static_cast<std::size_t>(K) - 1);
  Vector r_s(n), p(n), b(n);
  std::vector<bool> seen(n, false);
  for (const auto& a : candidates) {
    const int lo = std::min(a.pair.far, a.pair.near);
    const int hi = std::max(a.pair.far, a.pair.near);
    const std::size_t idx = vec_index(lo, hi, K) - 1;
    if (seen[idx]) throw InvalidArgument("build_lp: pair listed twice");
    seen[idx] = true;

    const RateReport rates = rate_report(a.pair, a.p_far, a.p_near, scenario.noise_power);
    const double inf = std::numeric_limits<double>::infinity();
    const double far_ratio = rates.oma_far > 0.0 ? rates.rate_far / rates.oma_far : inf;
    const double near_ratio = rates.oma_near > 0.0 ? rates.rate_near / rates.oma_near : inf;
    double cap = std::min({far_ratio, near_ratio, 1.0});
    if (cap > 1.0 - kCapSnap) cap = 1.0;
    if (!(cap > 0.0)) throw InvalidArgument("build_lp: rate cap must be positive");

    r_s[idx] = a.secrecy;
    p[idx] = a.p_far + a.p_near;
    b[idx] = cap;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw InvalidArgument("build_lp: allocations do not cover every candidate pair");
  return assemble_lp(K, std::move(r_s), std::move(p), std::move(b), scenario.budget);
}

void BarrierParams::validate() const {
  if (!(t0 > 0.0)) throw InvalidArgument("barrier: t0 must be > 0");
  if (!(xi > 1.0)) throw InvalidArgument("barrier: xi must be > 1");
  if (!(epsilon > 0.0)) throw InvalidArgument("barrier: epsilon must be > 0");
  if (!(rho > 0.0)) throw InvalidArgument("barrier: rho must be > 0");
  if (!(zeta > 0.0 && zeta < 0.5)) throw InvalidArgument("barrier: zeta must lie in (0, 1/2)");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("barrier: tau must lie in (0, 1)");
  if (max_updates < 0 || max_newton < 1) throw InvalidArgument("barrier: iteration caps must be positive");
}

Vector reciprocal_slacks(const LPData& lp, std::span<const double> x) {
  Vector s = slacks(lp, x);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0)) throw InteriorViolation("barrier: slack of row " + std::to_string(i) + " is not positive");
    s[i] = 1.0 / s[i];
  }
  return s;
}

double min_slack(const LPData& lp, std::span<const double> x) {
  const Vector s = slacks(lp, x);
  return *std::min_element(s.begin(), s.end());
}

double barrier_objective(const LPData& lp, std::span<const double> x, double t) {
  const Vector s = slacks(lp, x);
  double phi = 0.0;
  for (double v : s) {
    if (!(v > 0.0)) throw InteriorViolation("barrier: point is not strictly interior");
    phi -= std::log(v);
  }
  return -t * objective_value(lp, x) + phi;
}

GradientHessian barrier_gradient_hessian(const LPData& lp, const BarrierState& state) {
  const Vector y = reciprocal_slacks(lp, state.x);
  GradientHessian gh;
  gh.gradient = gradient_at(lp, y, state.t);
  gh.hessian = Matrix(lp.dim, lp.dim);

  const SparseRows& a = lp.A_rows;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double y2 = y[i] * y[i];
    for (std::size_t k = a.start[i]; k < a.start[i + 1]; ++k) {
      const double wk = y2 * a.value[k];
      for (std::size_t l = a.start[i]; l < a.start[i + 1]; ++l) gh.hessian(a.index[k], a.index[l]) += wk * a.value[l];
    }
  }
  return gh;
}

Residual residual_J(const LPData& lp, const BarrierState& state) {
  const Vector y = reciprocal_slacks(lp, state.x);
  Residual r;
  r.dual = gradient_at(lp, y, state.t);
  const Vector dtw = multiply_transposed(lp.D_rows, state.w);
  for (std::size_t j = 0; j < r.dual.size(); ++j) r.dual[j] += dtw[j];
  r.primal = multiply(lp.D_rows, state.x);
  for (double& v : r.primal) v -= 1.0;
  r.primal_norm = frobenius_norm(r.primal);
  const double dn = frobenius_norm(r.dual);
  r.norm = std::sqrt(dn * dn + r.primal_norm * r.primal_norm);
  return r;
}

Matrix kkt_matrix(const LPData& lp, const Matrix& hessian) {
  const std::size_t n = lp.dim;
  const std::size_t e = lp.D.rows();
  Matrix kkt(n + e, n + e);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) kkt(i, j) = hessian(i, j);
  for (std::size_t k = 0; k < e; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      kkt(n + k, j) = lp.D(k, j);
      kkt(j, n + k) = lp.D(k, j);
    }
  }
  return kkt;
}

NewtonStep newton_step(const LPData& lp, const BarrierState& state) {
  const GradientHessian gh = barrier_gradient_hessian(lp, state);
  const std::size_t n = lp.dim;
  const std::size_t e = lp.D.rows();

  // Symmetric diagonal scaling of the x block: near the boundary the Hessian
  // diagonal spans many orders of magnitude.
  Vector scale(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    if (gh.hessian(j, j) > 0.0) scale[j] = 1.0 / std::sqrt(gh.hessian(j, j));

  Vector rhs(n + e);
  for (std::size_t j = 0; j < n; ++j) rhs[j] = -gh.gradient[j] * scale[j];
  const Vector dx = multiply(lp.D_rows, state.x);
  for (std::size_t k = 0; k < e; ++k) rhs[n + k] = 1.0 - dx[k];

  Matrix kkt(n + e, n + e);
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = gh.hessian.row(i);
    auto row = kkt.row(i);
    for (std::size_t j = 0; j < n; ++j) row[j] = h[j] * scale[i] * scale[j];
  }
  for (std::size_t k = 0; k < e; ++k) {
    const auto d = lp.D.row(k);
    for (std::size_t j = 0; j < n; ++j) {
      if (d[j] == 0.0) continue;
      kkt(n + k, j) = d[j] * scale[j];
      kkt(j, n + k) = d[j] * scale[j];
    }
  }

  LUFactors f;
  try {
    f = lu_factor(std::move(kkt));
  } catch (const SingularMatrixError& err) {
    throw SingularMatrixError(std::string("newton_step: singular KKT system at t = ") + std::to_string(state.t) +
                              ", min slack " + std::to_string(min_slack(lp, state.x)) + ": " + err.what());
  }
  const Vector sol = lu_solve(f, rhs);

  NewtonStep step;
  step.dx.resize(n);
  for (std::size_t j = 0; j < n; ++j) step.dx[j] = sol[j] * scale[j];
  step.dw.resize(e);
  for (std::size_t k = 0; k < e; ++k) step.dw[k] = sol[n + k] - state.w[k];
  return step;
}

double line_search(const LPData& lp, const BarrierState& state, const NewtonStep& step, const BarrierParams& params) {
  const Vector y0 = reciprocal_slacks(lp, state.x);
  const double base = residual_norms(lp, state.x, state.w, y0, state.t).total;

  const auto zero = [](double v) { return v == 0.0; };
  if (std::all_of(step.dx.begin(), step.dx.end(), zero) && std::all_of(step.dw.begin(), step.dw.end(), zero))
    return 1.0;

  const std::size_t n = lp.dim;
  Vector x(n);
  Vector w(state.w.size());
  for (double s = 1.0; s >= kMinStep; s *= params.tau) {
    for (std::size_t j = 0; j < n; ++j) x[j] = state.x[j] + s * step.dx[j];
    Vector sl = slacks(lp, x);
    if (*std::min_element(sl.begin(), sl.end()) <= 0.0) continue;
    for (double& v : sl) v = 1.0 / v;
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = state.w[k] + s * step.dw[k];
    if (residual_norms(lp, x, w, sl, state.t).total <= (1.0 - params.zeta * s) * base) return s;
  }
  throw LineSearchFailure("line search: step fell below 1e-12 at t = " + std::to_string(state.t) +
                          " (||J|| = " + std::to_string(base) + ")");
}

int predicted_updates(int num_pairs, double epsilon, double t0, double xi) {
  const double m = static_cast<double>(num_pairs) * (2.0 * num_pairs - 1.0);
  const double v = std::log(m / (epsilon * t0)) / std::log(xi);
  return std::max(0, static_cast<int>(std::ceil(v)));
}

BarrierResult barrier_solve(const LPData& lp, const BarrierParams& params) {
  params.validate();
  if (lp.num_pairs < 1 || lp.dim == 0) throw InvalidArgument("barrier_solve: empty LP");

  // A single pair is forced by D x = 1; the KKT system is singular there.
  if (lp.num_pairs == 1) {
    BarrierResult r;
    r.x = {1.0};
    r.w.assign(2, 0.0);
    r.objective = lp.r_s[0];
    r.diagnostics.final_t = params.t0;
    return r;
  }

  // The uniform fractional assignment satisfies D x = 1; when it is strictly
  // inside every row it is the starting point. Otherwise phase one looks for
  // the cheapest assignment to decide whether the power row admits a strict
  // interior at all.
  const Vector uniform(lp.dim, 1.0 / (2.0 * lp.num_pairs - 1.0));
  if (min_slack(lp, uniform) <= 0.0) {
    Vector cost(lp.p.size());
    std::transform(lp.p.begin(), lp.p.end(), cost.begin(), [](double v) { return -v; });
    const LPData cheapest = assemble(lp.num_pairs, std::move(cost), lp.p, lp.b, lp.budget, false);
    // Stop once an iterate clears the budget, once the duality gap 2n/t shows
    // that no assignment does, or at the accuracy asked of the main solve.
    const double threshold = lp.budget * (1.0 - kPowerRowMargin);
    const double rows = static_cast<double>(2 * lp.dim);
    const double m = static_cast<double>(lp.dim);
    BarrierResult floor = run_barrier(cheapest, params, nullptr, [&](const BarrierState& st, bool centered) {
      const double power = std::inner_product(lp.p.begin(), lp.p.end(), st.x.begin(), 0.0);
      if (power < threshold) return true;
      return centered && (power - rows / st.t >= threshold || m / st.t < params.epsilon);
    });
    const double min_power = std::inner_product(lp.p.begin(), lp.p.end(), floor.x.begin(), 0.0);
    if (min_power >= threshold) {
      floor.objective = objective_value(lp, floor.x);
      floor.diagnostics.phase_one = true;
      floor.diagnostics.power_row_tight = true;
      return floor;
    }
    // The interior can be a thin sliver next to the cheapest assignment, where
    // an infeasible start stalls. Start on D x = 1 instead, halfway between the
    // cheapest power and the budget.
    const double uniform_power = std::inner_product(lp.p.begin(), lp.p.end(), uniform.begin(), 0.0);
    const double target = 0.5 * (lp.budget + min_power);
    const double lambda =
        uniform_power > target ? std::min(1.0, (uniform_power - target) / (uniform_power - min_power)) : 0.0;
    Vector start(lp.dim);
    for (std::size_t j = 0; j < lp.dim; ++j) start[j] = lambda * floor.x[j] + (1.0 - lambda) * uniform[j];
    if (!(min_slack(lp, start) > 0.0)) start = floor.x;
    BarrierResult r = run_barrier(lp, params, &start);
    r.diagnostics.phase_one = true;
    return r;
  }

  return run_barrier(lp, params, &uniform);
}

}  // namespace noma
