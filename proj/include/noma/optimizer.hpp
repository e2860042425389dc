#pragma once

#include <optional>
#include <span>
#include <vector>

#include "noma/pairing_lp.hpp"
#include "noma/power_alloc.hpp"
#include "noma/rounding.hpp"
#include "noma/scenario.hpp"

namespace noma {

enum class LpBackend { barrier, simplex };

struct OptimizerParams {
  double eta = 1e-6;  ///< stop when |o_q - o_{q-1}| < eta (bits/s/Hz)
  int max_outer = 50;
  LpBackend backend = LpBackend::barrier;
  BarrierParams barrier;
};

struct Solution {
  Pairing pairing;
  std::vector<PairAllocation> allocations;  ///< one per matched pair
  double price = 0.0;                       ///< calibrated dual variable
  double sum_secrecy = 0.0;                 ///< bits/s/Hz
  int iterations = 0;                       ///< outer iterations run
  bool converged = false;                   ///< |o_q - o_{q-1}| < eta was reached
  bool cycled = false;                      ///< stopped on a revisited pairing
  std::vector<double> trajectory;           ///< o_0, o_1, ..., o_q
  std::vector<BarrierDiagnostics> lp_diagnostics;  ///< barrier backend only
};

/// Sum of secrecy rates of the allocations whose pair belongs to `pairing`.
double sum_secrecy(const Pairing& pairing, std::span<const PairAllocation> allocations);

/// Role-assigned pairs of a matching.
std::vector<OrderedPair> ordered_pairs(const Scenario& scenario, const Pairing& pairing);

/// Strongest user with weakest, second strongest with second weakest, ...
Pairing initial_pairing(const Scenario& scenario);

/// Calibrated closed-form powers for a fixed matching.
Solution evaluate_pairing(const Scenario& scenario, const Pairing& pairing);

/// Alternates power allocation and LP-based pairing. Returns the best
/// solution visited. Errors from the inner solvers are rethrown nested
/// inside an Error naming the outer iteration.
Solution optimize(const Scenario& scenario, const OptimizerParams& params = {},
                  const std::optional<Pairing>& initial = std::nullopt);

struct ConstraintReport {
  bool rate_parity = true;  ///< NOMA rates >= orthogonal-access rates
  bool power = true;        ///< total power <= P (1 + 1e-8)
  bool matching = true;
  bool ok() const { return rate_parity && power && matching; }
};

ConstraintReport check_constraints(const Scenario& scenario, const Solution& solution);

}  // namespace noma
