#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "noma/optimizer.hpp"
#include "noma/scenario.hpp"

namespace noma {

enum class ExperimentId { iters, users, power, runtime, epsilon };

std::string_view experiment_name(ExperimentId id);
/// Throws InvalidArgument for an unknown name.
ExperimentId parse_experiment_id(std::string_view name);

/// The compared schemes, in CSV order.
inline constexpr std::string_view kSchemes[] = {"proposed", "epa", "rp", "gs", "simplex"};

/// Sweep semantics: users, runtime and iters sweep the user count 2K; power
/// sweeps the budget in dBm; epsilon sweeps the barrier tolerance.
struct ExperimentSpec {
  ExperimentId id = ExperimentId::users;
  std::vector<double> sweep;
  int trials = 200;
  std::uint64_t seed = 1;
  SystemConfig base;
  OptimizerParams solver;
  bool timing = false;  ///< runtime_s is 0 unless set
  int threads = 1;

  void validate() const;
};

/// Default sweep and solver settings of an experiment. The barrier tolerance
/// defaults to 1e8 and timing is on for the runtime experiment only.
ExperimentSpec default_spec(ExperimentId id);

/// Reads `key = value` settings over default_spec(id): SystemConfig keys,
/// solver keys (epsilon, xi, t0, rho, zeta, tau, max_updates, max_newton,
/// eta, max_outer), and trials, seed, threads, sweep (comma separated).
/// Unknown keys are rejected.
ExperimentSpec load_experiment_spec(ExperimentId id, const KeyValues& kv);
ExperimentSpec read_experiment_spec(ExperimentId id, const std::filesystem::path& path);

struct ResultRow {
  std::string scheme;
  double sweep = 0.0;
  double mean_rate = 0.0;  ///< bits/s/Hz
  double std_rate = 0.0;   ///< sample standard deviation
  double mean_iters = 0.0;
  double runtime_s = 0.0;  ///< median seconds per call
  int samples = 0;         ///< trials aggregated
};

/// One line per accepted Newton step of the proposed scheme's LP solves.
struct TraceLine {
  double sweep = 0.0;
  int trial = 0;
  int outer = 0;  ///< outer iteration (1-based)
  TraceRow row;
};

/// Per-trial values of a successful trial, indexed like kSchemes.
struct TrialRecord {
  double sweep = 0.0;
  int trial = 0;
  double rate[5] = {};
  int iters[5] = {};
  double seconds[5] = {};
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<TrialRecord> records;
  std::vector<TraceLine> trace;  ///< filled when requested
  int trials_total = 0;          ///< trials times sweep points
  int trials_failed = 0;
  std::vector<std::string> failures;

  /// More than 1% of the trials failed.
  bool failed() const { return trials_failed * 100 > trials_total; }
};

ExperimentResult run_experiment(const ExperimentSpec& spec, bool collect_trace = false);

void write_csv(std::ostream& out, std::span<const ResultRow> rows);
void write_trace_csv(std::ostream& out, std::span<const TraceLine> lines);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace noma
