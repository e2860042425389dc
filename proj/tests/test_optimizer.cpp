#include <doctest.h>

#include <cmath>

#include "noma/baselines.hpp"
#include "noma/errors.hpp"
#include "noma/optimizer.hpp"
#include "oracles.hpp"

using namespace noma;

TEST_SUITE("optimizer") {

TEST_CASE("sum of secrecy rates") {
  const Pairing p{1, {{1, 2}}};
  const OrderedPair pair{1, 2, 0.25, 1.0};
  const std::vector<PairAllocation> zero{allocate_pair(pair, 0.0, 1.0)};
  CHECK(sum_secrecy(p, zero) == 0.0);

  PairAllocation a;
  a.pair = pair;
  a.p_near = 1.0;
  a.p_far = 0.0;
  a.p_pair = 1.0;
  a.secrecy = secrecy_rate(pair, 0.0, 1.0, 1.0);
  const std::vector<PairAllocation> one{a};
  CHECK(sum_secrecy(p, one) == doctest::Approx(0.6781).epsilon(1e-4));

  // Allocations of pairs outside the matching are ignored.
  PairAllocation other = a;
  other.pair = OrderedPair{1, 3, 0.25, 1.0};
  const std::vector<PairAllocation> two{a, other};
  CHECK(sum_secrecy(p, two) == sum_secrecy(p, one));
}

TEST_CASE("evaluated sum equals a recomputation from scratch") {
  const Scenario sc = oracle::scenario(4, 12);
  const Solution s = evaluate_pairing(sc, initial_pairing(sc));
  double total = 0.0, power = 0.0;
  for (const auto& a : s.allocations) {
    total += secrecy_rate(a.pair, a.p_far, a.p_near, sc.noise_power);
    power += a.p_pair;
  }
  CHECK(s.sum_secrecy == doctest::Approx(total).epsilon(1e-14));
  CHECK(power <= sc.budget);
  CHECK(power >= sc.budget * (1.0 - 1e-8));
}

TEST_CASE("initial pairing matches strongest with weakest") {
  SystemConfig c;
  c.num_pairs = 3;
  const Scenario sc = scenario_from_gains(c, {5.0, 1.0, 3.0, 6.0, 2.0, 4.0});
  const Pairing p = initial_pairing(sc);
  CHECK(p == Pairing{3, {{2, 4}, {1, 5}, {3, 6}}});
}

TEST_CASE("returned solutions satisfy every constraint") {
  for (int K = 1; K <= 5; ++K)
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Scenario sc = oracle::scenario(K, seed * 13 + K);
      for (const LpBackend backend : {LpBackend::barrier, LpBackend::simplex}) {
        OptimizerParams params;
        params.backend = backend;
        const Solution s = optimize(sc, params);
        CHECK(check_constraints(sc, s).ok());
        CHECK(is_perfect_matching(s.pairing));
        double power = 0.0;
        for (const auto& a : s.allocations) {
          power += a.p_far + a.p_near;
          const RateReport r = rate_report(a.pair, a.p_far, a.p_near, sc.noise_power);
          CHECK(r.rate_far >= r.oma_far * (1.0 - 1e-9));
          CHECK(r.rate_near >= r.oma_near * (1.0 - 1e-9));
        }
        CHECK(power <= sc.budget * (1.0 + 1e-8));
        REQUIRE(s.trajectory.size() == static_cast<std::size_t>(s.iterations) + 1);
        for (double o : s.trajectory) CHECK(std::isfinite(o));
        if (s.converged)
          CHECK(std::fabs(s.trajectory.back() - s.trajectory[s.trajectory.size() - 2]) < params.eta);
        CHECK(s.sum_secrecy == *std::max_element(s.trajectory.begin(), s.trajectory.end()));
      }
    }
}

TEST_CASE("restarting from a converged pairing converges at once") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Scenario sc = oracle::scenario(3 + seed % 3, seed);
    const Solution first = optimize(sc);
    if (!first.converged) continue;
    ++checked;
    const Solution again = optimize(sc, {}, first.pairing);
    CHECK(again.iterations == 1);
    CHECK(again.converged);
    CHECK(again.pairing == first.pairing);
  }
  CHECK(checked >= 25);
}

TEST_CASE("beats the best of 20 random restarts on most small scenarios") {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Scenario sc = oracle::scenario(2, seed + 5000);
    const Solution s = optimize(sc);
    Rng rng(seed);
    double best = 0.0;
    for (int r = 0; r < 20; ++r) best = std::max(best, evaluate_pairing(sc, random_pairing(sc, rng)).sum_secrecy);
    wins += s.sum_secrecy >= best - 1e-12;
  }
  CHECK(wins >= 90);
}

TEST_CASE("solver failures are reported with the outer iteration") {
  const Scenario sc = oracle::scenario(3, 2);
  OptimizerParams params;
  params.barrier.max_newton = 1;
  params.barrier.epsilon = 1e-6;
  bool nested = false;
  try {
    optimize(sc, params);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("outer iteration 1") != std::string::npos);
    try {
      std::rethrow_if_nested(e);
    } catch (const ConvergenceError&) {
      nested = true;
    }
  }
  CHECK(nested);
}

TEST_CASE("argument checks") {
  const Scenario sc = oracle::scenario(2, 1);
  OptimizerParams params;
  params.eta = 0.0;
  CHECK_THROWS_AS(optimize(sc, params), InvalidArgument);
  CHECK_THROWS_AS(evaluate_pairing(sc, Pairing{2, {{1, 2}, {1, 3}}}), InvalidArgument);
}

}  // TEST_SUITE
