// noma_sim: Monte-Carlo sweeps and single-scenario solves.
//
//   noma_sim run --experiment users --trials 200 --seed 7 --out users.csv
//   noma_sim solve --pairs 4 --seed 3
//
// Every run option can also come from an environment variable NOMA_SIM_<NAME>
// (NOMA_SIM_EXPERIMENT, NOMA_SIM_CONFIG, NOMA_SIM_SEED, NOMA_SIM_TRIALS,
// NOMA_SIM_OUT, NOMA_SIM_TRACE, NOMA_SIM_THREADS, NOMA_SIM_TIMING).
// Command-line flags win over the environment, which wins over the config file.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "noma/errors.hpp"
#include "noma/experiments.hpp"
#include "noma/optimizer.hpp"

namespace {

constexpr int kExitTrialFailures = 1;
constexpr int kExitUsage = 2;

struct RunOptions {
  std::string experiment;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> threads;
  std::string out;
  bool trace = false;
  std::optional<bool> timing;
};

std::string trace_path(const std::string& out) {
  const auto dot = out.rfind('.');
  const auto slash = out.rfind('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? out.substr(0, dot) : out) + ".trace.csv";
}

int run(const RunOptions& o) {
  const noma::ExperimentId id = noma::parse_experiment_id(o.experiment);
  noma::ExperimentSpec spec =
      o.config.empty() ? noma::default_spec(id) : noma::read_experiment_spec(id, o.config);
  if (o.seed) spec.seed = *o.seed;
  if (o.trials) spec.trials = *o.trials;
  if (o.threads) spec.threads = *o.threads;
  if (o.timing) spec.timing = *o.timing;
  spec.validate();

  const noma::ExperimentResult result = noma::run_experiment(spec, o.trace);
  for (const auto& f : result.failures) std::cerr << "noma_sim: trial failed: " << f << '\n';
  for (const auto& row : result.rows)
    if (row.samples < spec.trials)
      std::cerr << "noma_sim: row " << row.scheme << " @ " << noma::format_double(row.sweep) << " aggregates "
                << row.samples << " of " << spec.trials << " trials\n";

  std::ofstream csv(o.out, std::ios::binary);
  if (!csv) throw noma::InvalidArgument("cannot write " + o.out);
  noma::write_csv(csv, result.rows);
  if (o.trace) {
    std::ofstream tr(trace_path(o.out), std::ios::binary);
    if (!tr) throw noma::InvalidArgument("cannot write " + trace_path(o.out));
    noma::write_trace_csv(tr, result.trace);
  }
  if (result.failed()) {
    std::cerr << "noma_sim: " << result.trials_failed << " of " << result.trials_total << " trials failed\n";
    return kExitTrialFailures;
  }
  return 0;
}

int solve(const noma::SystemConfig& config, bool simplex) {
  config.validate();
  const noma::Scenario sc = noma::sample_scenario(config);
  noma::OptimizerParams params;
  if (simplex) params.backend = noma::LpBackend::simplex;
  const noma::Solution s = noma::optimize(sc, params);

  std::printf("users:\n");
  for (const auto& u : sc.users)
    std::printf("  %2d  d = %7.2f m  |h|^2 = %.6e\n", u.user_id, u.distance, u.gain_sq);
  std::printf("pairs (far, near): power far / near [W], secrecy [bits/s/Hz]\n");
  for (const auto& a : s.allocations)
    std::printf("  (%2d, %2d)  %.6e / %.6e  %.6f\n", a.pair.far, a.pair.near, a.p_far, a.p_near, a.secrecy);
  std::printf("sum secrecy rate %.6f bits/s/Hz after %d iteration(s)%s\n", s.sum_secrecy, s.iterations,
              s.converged ? "" : (s.cycled ? " (stopped on a repeated pairing)" : " (iteration cap)"));
  return 0;
}

void print_error(const std::exception& e, int depth = 0) {
  std::cerr << (depth == 0 ? "noma_sim: " : "  caused by: ") << e.what() << '\n';
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_error(inner, depth + 1);
  } catch (...) {
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NOMA pairing and power allocation simulator"};
  app.require_subcommand(1);

  RunOptions ro;
  auto* run_cmd = app.add_subcommand("run", "Run a Monte-Carlo experiment and write aggregated CSV");
  run_cmd->add_option("--experiment", ro.experiment, "iters | users | power | runtime | epsilon")
      ->required()
      ->envname("NOMA_SIM_EXPERIMENT");
  run_cmd->add_option("--config", ro.config, "key = value settings file")
      ->check(CLI::ExistingFile)
      ->envname("NOMA_SIM_CONFIG");
  run_cmd->add_option("--seed", ro.seed, "base seed; trial t uses seed ^ t")->envname("NOMA_SIM_SEED");
  run_cmd->add_option("--trials", ro.trials, "trials per sweep point")->envname("NOMA_SIM_TRIALS");
  run_cmd->add_option("--threads", ro.threads, "worker threads")->envname("NOMA_SIM_THREADS");
  run_cmd->add_option("--out", ro.out, "output CSV path")->required()->envname("NOMA_SIM_OUT");
  run_cmd->add_flag("--trace", ro.trace, "also write <out>.trace.csv with one row per Newton step")
      ->envname("NOMA_SIM_TRACE");
  auto* timing = run_cmd->add_flag("--timing,!--no-timing", "measure wall-clock runtime_s")
                     ->envname("NOMA_SIM_TIMING");

  noma::SystemConfig sc;
  bool use_simplex = false;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one sampled scenario and print the result");
  solve_cmd->add_option("--pairs", sc.num_pairs, "K; the cell holds 2K users");
  solve_cmd->add_option("--seed", sc.rng_seed, "scenario seed");
  solve_cmd->add_option("--power-dbm", sc.total_power_dbm, "total transmit power");
  solve_cmd->add_option("--radius", sc.cell_radius, "cell radius in metres");
  solve_cmd->add_flag("--simplex", use_simplex, "solve the pairing LP with the Simplex method");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) {
      if (timing->count() > 0) ro.timing = timing->as<bool>();
      return run(ro);
    }
    return solve(sc, use_simplex);
  } catch (const noma::InvalidArgument& e) {
    print_error(e);
    return kExitUsage;
  } catch (const std::exception& e) {
    print_error(e);
    return kExitTrialFailures;
  }
}
