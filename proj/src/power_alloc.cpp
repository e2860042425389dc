#include "noma/power_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "noma/errors.hpp"

namespace noma {

namespace {

constexpr double kCubicTolerance = 1e-9;
constexpr int kMaxBracketDoublings = 200;
constexpr double kBudgetTolerance = 1e-8;
constexpr double kBracketWidth = 1e-14;

void check_pair(const OrderedPair& pair, double noise) {
  if (!std::isfinite(pair.gain_far) || !std::isfinite(pair.gain_near) || !std::isfinite(noise))
    throw InvalidArgument("power allocation: non-finite input");
  if (!(pair.gain_far > 0.0)) throw InvalidArgument("power allocation: far-user gain must be > 0");
  if (pair.gain_far > pair.gain_near) throw InvalidArgument("power allocation: pair roles are swapped");
  if (!(noise > 0.0)) throw InvalidArgument("power allocation: noise power must be > 0");
}

// sqrt(1 + x) - 1 without cancellation for small x.
double sqrt1pm1(double x) { return std::expm1(0.5 * std::log1p(x)); }

double bisect_root(const StationarityCubic& f) {
  double lo = std::max(f.shape, 0.0);  // f(shape) = -offset <= 0
  double hi = lo + std::cbrt(std::max(f.offset, 0.0)) + 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double total_power(std::span<const OrderedPair> pairs, double price, double noise) {
  double total = 0.0;
  for (const auto& p : pairs) total += pair_power_star(p, price, noise);
  return total;
}

}  // namespace

StationarityCubic stationarity_cubic(const OrderedPair& pair, double price, double noise) {
  check_pair(pair, noise);
  if (!(price > 0.0) || !std::isfinite(price)) throw InvalidArgument("dual price must be finite and > 0");
  const double hm = pair.gain_far;
  const double hn = pair.gain_near;
  const double gap = hn - hm;
  return StationarityCubic{gap / hn, hm * gap / (2.0 * std::numbers::ln2 * noise * price * hn)};
}

double pn_star(const OrderedPair& pair, double p_pair, double noise) {
  check_pair(pair, noise);
  if (!(p_pair >= 0.0) || !std::isfinite(p_pair)) throw InvalidArgument("pair budget must be finite and >= 0");
  return noise / pair.gain_far * sqrt1pm1(p_pair * pair.gain_far / noise);
}

double pn_lower_bound(const OrderedPair& pair, double p_pair, double noise) {
  check_pair(pair, noise);
  return noise / pair.gain_near * sqrt1pm1(p_pair * pair.gain_near / noise);
}

double secrecy_of_budget(const OrderedPair& pair, double p_pair, double noise) {
  check_pair(pair, noise);
  const double x = p_pair * pair.gain_far / noise;
  const double near_snr = pair.gain_near / pair.gain_far * sqrt1pm1(x);
  return (std::log1p(near_snr) - 0.5 * std::log1p(x)) / std::numbers::ln2;
}

double cardano_a(const OrderedPair& pair, double price, double noise) {
  const StationarityCubic f = stationarity_cubic(pair, price, noise);
  const double r = f.shape;
  const double c = f.offset;
  // Depressed cubic y^3 + P y + Q with a = y + r/3: P = -r^2/3, Q = -2r^3/27 - c.
  // Its discriminant Q^2/4 + P^3/27 reduces to c (4 r^3 + 27 c) / 108.
  const double radicand = (4.0 * r * r * r + 27.0 * c) / 108.0;
  if (c < 0.0 || radicand < 0.0) throw NumericDomainError("Cardano discriminant is negative");
  const double half_q = r * r * r / 27.0 + 0.5 * c;
  return 108.0 * (half_q + std::sqrt(c) * std::sqrt(radicand));
}

double cardano_alpha(const OrderedPair& pair, double price, double noise) {
  const StationarityCubic f = stationarity_cubic(pair, price, noise);
  const double a = cardano_a(pair, price, noise);
  if (a == 0.0) return 0.0;  // identical channels: f(a) = a^3
  const double r = f.shape;
  const double u = std::cbrt(a / 108.0);
  double alpha = u + r * r / (9.0 * u) + r / 3.0;
  const double scale = std::max(1.0, alpha * alpha * alpha);
  if (!std::isfinite(alpha) || std::abs(f(alpha)) > kCubicTolerance * scale) alpha = bisect_root(f);
  return alpha;
}

double pair_power_star(const OrderedPair& pair, double price, double noise) {
  const double alpha = cardano_alpha(pair, price, noise);
  if (alpha <= 1.0) return 0.0;
  return noise / pair.gain_far * (alpha - 1.0) * (alpha + 1.0);
}

PairAllocation allocate_pair(const OrderedPair& pair, double p_pair, double noise) {
  PairAllocation a;
  a.pair = pair;
  a.p_pair = p_pair;
  a.p_near = std::min(pn_star(pair, p_pair, noise), p_pair);
  a.p_far = p_pair - a.p_near;
  if (a.p_far < 0.0 && a.p_far > -1e-12) a.p_far = 0.0;
  a.secrecy = secrecy_rate(pair, a.p_far, a.p_near, noise);
  return a;
}

std::vector<PairAllocation> allocate_at_price(std::span<const OrderedPair> pairs, double price, double noise) {
  std::vector<PairAllocation> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(allocate_pair(p, pair_power_star(p, price, noise), noise));
  return out;
}

DualState calibrate_dual(std::span<const OrderedPair> pairs, double budget, double noise) {
  if (pairs.empty()) throw InvalidArgument("calibrate_dual: no pairs");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw InvalidArgument("calibrate_dual: budget must be > 0");

  double lo = 1e-12;
  double hi = 1.0;
  double total_lo = total_power(pairs, lo, noise);
  double total_hi = total_power(pairs, hi, noise);
  int doublings = 0;
  while (total_hi > budget) {
    if (++doublings > kMaxBracketDoublings) throw ConvergenceError("calibrate_dual: upper price bracket not found");
    lo = hi;
    total_lo = total_hi;
    hi *= 2.0;
    total_hi = total_power(pairs, hi, noise);
  }
  doublings = 0;
  while (total_lo < budget) {
    if (++doublings > kMaxBracketDoublings) throw ConvergenceError("calibrate_dual: lower price bracket not found");
    hi = lo;
    total_hi = total_lo;
    lo *= 0.5;
    total_lo = total_power(pairs, lo, noise);
  }

  DualState state;
  // Invariant: total_lo >= budget >= total_hi. The hi end is returned so the
  // allocated total never exceeds the budget.
  while (budget - total_hi > kBudgetTolerance * budget && (hi - lo) > kBracketWidth * hi) {
    const double mid = std::sqrt(lo * hi);
    const double total_mid = total_power(pairs, mid, noise);
    if (total_mid > total_lo * (1.0 + 1e-12) || total_mid < total_hi * (1.0 - 1e-12))
      throw ConvergenceError("calibrate_dual: total power is not monotone in the price");
    if (total_mid >= budget) {
      lo = mid;
      total_lo = total_mid;
    } else {
      hi = mid;
      total_hi = total_mid;
    }
    ++state.iterations;
  }

  state.price = hi;
  state.total_power = total_hi;
  state.bracket_lo = lo;
  state.bracket_hi = hi;
  state.allocations = allocate_at_price(pairs, hi, noise);
  return state;
}

std::vector<PairAllocation> epa_allocation(std::span<const OrderedPair> pairs, double budget, double noise) {
  if (!(budget > 0.0)) throw InvalidArgument("epa_allocation: budget must be > 0");
  const double per_user = budget / (2.0 * static_cast<double>(pairs.size()));
  std::vector<PairAllocation> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    PairAllocation a;
    a.pair = p;
    a.p_pair = 2.0 * per_user;
    a.p_near = per_user;
    a.p_far = per_user;
    a.secrecy = secrecy_rate(p, a.p_far, a.p_near, noise);
    out.push_back(a);
  }
  return out;
}

}  // namespace noma
