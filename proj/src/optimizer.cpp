#include "noma/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "noma/baselines.hpp"
#include "noma/errors.hpp"

namespace noma {

double sum_secrecy(const Pairing& pairing, std::span<const PairAllocation> allocations) {
  const auto partner = pairing.partners();
  double total = 0.0;
  for (const auto& a : allocations) {
    const auto far = static_cast<std::size_t>(a.pair.far - 1);
    if (far < partner.size() && partner[far] == a.pair.near) total += a.secrecy;
  }
  return total;
}

std::vector<OrderedPair> ordered_pairs(const Scenario& scenario, const Pairing& pairing) {
  std::vector<OrderedPair> out;
  out.reserve(pairing.pairs.size());
  for (const auto& [m, n] : pairing.pairs) out.push_back(OrderedPair::make(m, scenario.gain(m), n, scenario.gain(n)));
  return out;
}

Pairing initial_pairing(const Scenario& scenario) {
  std::vector<int> users(static_cast<std::size_t>(scenario.num_users()));
  std::iota(users.begin(), users.end(), 1);
  std::stable_sort(users.begin(), users.end(), [&](int a, int b) { return scenario.gain(a) > scenario.gain(b); });
  Pairing p;
  p.num_pairs = scenario.num_pairs();
  for (std::size_t i = 0, j = users.size() - 1; i < j; ++i, --j)
    p.pairs.emplace_back(std::min(users[i], users[j]), std::max(users[i], users[j]));
  return p;
}

Solution evaluate_pairing(const Scenario& scenario, const Pairing& pairing) {
  if (!is_perfect_matching(pairing) || pairing.num_pairs != scenario.num_pairs())
    throw InvalidArgument("evaluate_pairing: not a perfect matching of the scenario's users");
  // Canonical pair order makes equal matchings sum to bitwise equal rates.
  Pairing sorted = pairing;
  sorted.pairs = pairing.canonical();
  const auto pairs = ordered_pairs(scenario, sorted);
  DualState dual = calibrate_dual(pairs, scenario.budget, scenario.noise_power);
  Solution s;
  s.pairing = pairing;
  s.allocations = std::move(dual.allocations);
  s.price = dual.price;
  s.sum_secrecy = sum_secrecy(pairing, s.allocations);
  return s;
}

Solution optimize(const Scenario& scenario, const OptimizerParams& params, const std::optional<Pairing>& initial) {
  if (!(params.eta > 0.0)) throw InvalidArgument("optimize: eta must be > 0");
  if (params.max_outer < 1) throw InvalidArgument("optimize: max_outer must be >= 1");

  Solution current = evaluate_pairing(scenario, initial ? *initial : initial_pairing(scenario));
  Solution best = current;
  std::vector<double> trajectory{current.sum_secrecy};
  std::vector<BarrierDiagnostics> diagnostics;
  std::set<std::vector<std::pair<int, int>>> visited{current.pairing.canonical()};
  const auto candidates = candidate_pairs(scenario);

  int q = 0;
  bool converged = false;
  bool cycled = false;
  while (q < params.max_outer) {
    ++q;
    try {
      const auto priced = allocate_at_price(candidates, current.price, scenario.noise_power);
      const LPData lp = build_lp(scenario, priced);
      Vector x;
      if (params.backend == LpBackend::barrier) {
        BarrierResult r = barrier_solve(lp, params.barrier);
        x = std::move(r.x);
        diagnostics.push_back(std::move(r.diagnostics));
      } else {
        x = simplex_solve(lp).x;
      }
      const Pairing next = greedy_round(x, scenario.num_pairs());
      const double previous = current.sum_secrecy;
      current = evaluate_pairing(scenario, next);
      trajectory.push_back(current.sum_secrecy);
      if (current.sum_secrecy > best.sum_secrecy) best = current;
      if (std::abs(current.sum_secrecy - previous) < params.eta) {
        converged = true;
        break;
      }
      // The update map is deterministic, so a revisited matching repeats forever.
      if (!visited.insert(current.pairing.canonical()).second) {
        cycled = true;
        break;
      }
    } catch (const Error&) {
      std::throw_with_nested(Error("optimize: outer iteration " + std::to_string(q) + " failed"));
    }
  }

  best.iterations = q;
  best.converged = converged;
  best.cycled = cycled;
  best.trajectory = std::move(trajectory);
  best.lp_diagnostics = std::move(diagnostics);
  return best;
}

ConstraintReport check_constraints(const Scenario& scenario, const Solution& solution) {
  ConstraintReport r;
  r.matching = is_perfect_matching(solution.pairing) && solution.pairing.num_pairs == scenario.num_pairs() &&
               solution.allocations.size() == solution.pairing.pairs.size();
  double total = 0.0;
  for (const auto& a : solution.allocations) {
    total += a.p_far + a.p_near;
    const RateReport rates = rate_report(a.pair, a.p_far, a.p_near, scenario.noise_power);
    const double tol = 1e-9 * std::max(1.0, std::max(rates.oma_far, rates.oma_near));
    if (rates.rate_far < rates.oma_far - tol || rates.rate_near < rates.oma_near - tol) r.rate_parity = false;
  }
  r.power = total <= scenario.budget * (1.0 + 1e-8);
  return r;
}

}  // namespace noma
