#pragma once

#include <span>
#include <vector>

#include "noma/rate_model.hpp"

namespace noma {

/// Powers of one NOMA pair. p_near + p_far == p_pair.
struct PairAllocation {
  OrderedPair pair;
  double p_pair = 0.0;
  double p_near = 0.0;
  double p_far = 0.0;
  double secrecy = 0.0;  ///< bits/s/Hz
};

/// Coefficients of the stationarity cubic
///   f(a) = a^3 - shape * a^2 - offset,  a = sqrt(1 + p_pair |h_m|^2 / noise),
/// with shape = (|h_n|^2 - |h_m|^2) / |h_n|^2 and
/// offset = |h_m|^2 (|h_n|^2 - |h_m|^2) / (2 ln2 noise price |h_n|^2).
struct StationarityCubic {
  double shape = 0.0;
  double offset = 0.0;

  double operator()(double a) const { return a * a * a - shape * a * a - offset; }
};

StationarityCubic stationarity_cubic(const OrderedPair& pair, double price, double noise);

/// Near-user power that makes the far user's NOMA rate exactly equal its
/// orthogonal-access rate: (noise/|h_m|^2)(sqrt(1 + p_pair |h_m|^2/noise) - 1).
double pn_star(const OrderedPair& pair, double p_pair, double noise);

/// Lower bound on p_near from the near user's rate-parity constraint.
double pn_lower_bound(const OrderedPair& pair, double p_pair, double noise);

/// Pair secrecy rate as a function of the pair budget when p_near = pn_star.
double secrecy_of_budget(const OrderedPair& pair, double p_pair, double noise);

/// Radicand-free part of the closed-form root: 108 * (-q/2 + sqrt(disc)) of
/// the depressed cubic. Strictly positive for valid inputs.
double cardano_a(const OrderedPair& pair, double price, double noise);

/// Unique positive root of the stationarity cubic via Cardano's formula,
/// falling back to bracketed bisection if the residual is out of tolerance.
double cardano_alpha(const OrderedPair& pair, double price, double noise);

/// Optimal pair budget at dual price `price`; zero when the root is <= 1.
double pair_power_star(const OrderedPair& pair, double price, double noise);

/// Full allocation for a pair at a fixed budget (p_near from pn_star).
PairAllocation allocate_pair(const OrderedPair& pair, double p_pair, double noise);

/// Result of pricing the total-power constraint.
struct DualState {
  double price = 0.0;  ///< dual variable
  double total_power = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int iterations = 0;
  std::vector<PairAllocation> allocations;
};

/// Bisects the dual price until the pair budgets sum to `budget`. The
/// returned total never exceeds `budget` and is within 1e-8 relative of it.
DualState calibrate_dual(std::span<const OrderedPair> pairs, double budget, double noise);

/// Allocations of all listed pairs at a fixed price.
std::vector<PairAllocation> allocate_at_price(std::span<const OrderedPair> pairs, double price, double noise);

/// Every user gets budget / (2K).
std::vector<PairAllocation> epa_allocation(std::span<const OrderedPair> pairs, double budget, double noise);

}  // namespace noma
