#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "noma/dense_linalg.hpp"
#include "noma/power_alloc.hpp"
#include "noma/scenario.hpp"

namespace noma {

/// Relaxed pairing LP
///   max r_s^T x  s.t.  A x <= u,  D x = 1
/// over the K(2K-1) above-diagonal entries of the pairing matrix, with
/// A = [I; -I; p^T] and u = [b; 0; P].
struct LPData {
  int num_pairs = 0;  ///< K
  std::size_t dim = 0;
  Vector r_s;
  Vector p;
  Vector b;
  Matrix A;
  Vector u;
  Matrix D;
  double budget = 0.0;
  SparseRows A_rows;  ///< compressed copies of A and D
  SparseRows D_rows;

  std::size_t num_users() const { return 2 * static_cast<std::size_t>(num_pairs); }
};

/// 1-based position of the pair (m, n), m < n, in row-major above-diagonal
/// order: (4K - m)(m - 1)/2 + n - m.
std::size_t vec_index(int m, int n, int num_pairs);

/// Inverse of vec_index: the (m, n) pair stored at a 1-based position.
std::pair<int, int> pair_at(std::size_t index, int num_pairs);

/// All C(2K, 2) pairs of the scenario with roles assigned, in vec_index order.
std::vector<OrderedPair> candidate_pairs(const Scenario& scenario);

/// Assembles the LP from allocations covering every candidate pair (any order).
LPData build_lp(const Scenario& scenario, std::span<const PairAllocation> candidates);

/// Assembles A, u and D for given objective, power and cap vectors.
LPData assemble_lp(int num_pairs, Vector r_s, Vector p, Vector b, double budget);

struct BarrierParams {
  double t0 = 1.0;
  double xi = 10.0;
  double epsilon = 1e-6;
  double rho = 1e-8;
  double zeta = 0.1;
  double tau = 0.5;
  int max_updates = 200;  ///< cap on t := xi t updates
  int max_newton = 200;   ///< Newton iterations per centering

  void validate() const;
};

struct BarrierState {
  Vector x;
  Vector w;
  double t = 1.0;
  Vector y;  ///< reciprocal slacks 1 / (u_i - a_i^T x)
  int updates = 0;
};

struct GradientHessian {
  Vector gradient;  ///< -t r_s + A^T y
  Matrix hessian;   ///< A^T diag(y)^2 A
};

struct Residual {
  Vector dual;    ///< gradient + D^T w
  Vector primal;  ///< D x - 1
  double norm = 0.0;
  double primal_norm = 0.0;
};

struct NewtonStep {
  Vector dx;
  Vector dw;
};

/// Reciprocal slacks at x; throws InteriorViolation if any slack is <= 0.
Vector reciprocal_slacks(const LPData& lp, std::span<const double> x);
double min_slack(const LPData& lp, std::span<const double> x);

/// g(x) = -t r_s^T x - sum ln(u_i - a_i^T x).
double barrier_objective(const LPData& lp, std::span<const double> x, double t);

GradientHessian barrier_gradient_hessian(const LPData& lp, const BarrierState& state);
Residual residual_J(const LPData& lp, const BarrierState& state);

/// Builds the KKT matrix [H D^T; D 0].
Matrix kkt_matrix(const LPData& lp, const Matrix& hessian);

/// Solves K [dx; w + dw] = -[gradient; D x - 1] by LU.
NewtonStep newton_step(const LPData& lp, const BarrierState& state);

/// Backtracking from s = 1 by s := tau s until the trial point is strictly
/// interior and ||J|| <= (1 - zeta s) ||J(current)||.
double line_search(const LPData& lp, const BarrierState& state, const NewtonStep& step, const BarrierParams& params);

struct TraceRow {
  int update = 0;
  double t = 0.0;
  double residual = 0.0;
  double step = 0.0;
  double min_slack = 0.0;
};

struct BarrierDiagnostics {
  int updates = 0;  ///< N_LP: number of t := xi t updates
  int newton_iterations = 0;
  int damped_steps = 0;  ///< accepted steps with s < 1
  int full_steps = 0;    ///< accepted steps with s = 1
  int line_search_steps = 0;
  int stalled_centerings = 0;  ///< centerings ended at the floating-point floor
  double kappa = 0.0;  ///< ||J|| at the starting point
  double final_t = 0.0;
  bool power_row_tight = false;  ///< no strictly feasible point; phase-one answer returned
  bool phase_one = false;
  std::vector<int> newton_per_centering;
  std::vector<TraceRow> trace;  ///< one row per accepted Newton step
};

struct BarrierResult {
  Vector x;
  Vector w;
  double objective = 0.0;
  BarrierDiagnostics diagnostics;
};

/// ceil(log(K(2K-1) / (epsilon t0)) / log xi), floored at zero.
int predicted_updates(int num_pairs, double epsilon, double t0, double xi);

/// Solves the relaxed LP with the log-barrier method and infeasible-start
/// Newton centering.
BarrierResult barrier_solve(const LPData& lp, const BarrierParams& params = {});

}  // namespace noma
