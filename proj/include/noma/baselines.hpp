#pragma once

#include <cstddef>
#include <vector>

#include "noma/dense_linalg.hpp"
#include "noma/pairing_lp.hpp"
#include "noma/rng.hpp"
#include "noma/rounding.hpp"
#include "noma/scenario.hpp"

namespace noma {

/// Uniformly random perfect matching (Fisher-Yates shuffle, consecutive users
/// paired).
Pairing random_pairing(int num_pairs, Rng& rng);
Pairing random_pairing(const Scenario& scenario, Rng& rng);

/// Preference score of a cross-side pair: its secrecy rate with an equal
/// per-pair budget P/K and the near-user power at its rate-parity bound.
double gale_shapley_score(const Scenario& scenario, int user_a, int user_b);

/// Deferred acceptance between the K strongest users (proposers) and the K
/// weakest users (receivers); both sides rank by gale_shapley_score.
Pairing gale_shapley_pairing(const Scenario& scenario);

/// True when no proposer/receiver pair strictly prefers each other over
/// their assigned partners.
bool is_stable(const Scenario& scenario, const Pairing& pairing);

/// Dense tableau of the standard-form LP
///   A x + s = u,  D x + r = 1,  x, s, r >= 0
/// with slacks s and Phase-1 artificials r.
struct SimplexTableau {
  Matrix rows;                     ///< constraint rows, last column is the rhs
  std::vector<double> reduced;     ///< reduced costs, last entry is the objective
  std::vector<std::size_t> basis;  ///< basic column of each row
  std::size_t num_structural = 0;
  std::size_t num_slack = 0;
  std::size_t num_artificial = 0;
  int phase = 1;
};

struct SimplexResult {
  Vector x;
  double objective = 0.0;
  int pivots = 0;
  SimplexTableau tableau;  ///< final tableau
};

/// Two-phase primal Simplex with Bland's rule on the relaxed pairing LP.
/// Throws InfeasibleError when Phase 1 leaves artificials positive and
/// ConvergenceError when the pivot cap is exceeded.
SimplexResult simplex_solve(const LPData& lp, int max_pivots = 100000);

}  // namespace noma
