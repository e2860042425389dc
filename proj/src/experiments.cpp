#include "noma/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

#include "noma/baselines.hpp"
#include "noma/errors.hpp"
#include "noma/rng.hpp"

namespace noma {

namespace {

constexpr std::uint64_t kRandomPairingTag = 1;

struct SchemeSample {
  double rate = 0.0;
  int iters = 0;
  double seconds = 0.0;
};

struct TrialOutcome {
  bool ok = false;
  std::string error;
  SchemeSample samples[5];
  std::vector<double> trajectory;  // proposed o_0, o_1, ...
  std::vector<TraceLine> trace;
};

using Clock = std::chrono::steady_clock;

template <class F>
auto timed(bool timing, double& seconds, F&& f) {
  if (!timing) return f();
  const auto start = Clock::now();
  auto out = f();
  seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

std::string describe(const std::exception& e) {
  std::string msg = e.what();
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    msg += ": " + describe(inner);
  } catch (...) {
    msg += ": unknown error";
  }
  return msg;
}

SystemConfig config_for(const ExperimentSpec& spec, double sweep_value, std::uint64_t trial) {
  SystemConfig c = spec.base;
  switch (spec.id) {
    case ExperimentId::iters:
    case ExperimentId::users:
    case ExperimentId::runtime:
      c.num_pairs = static_cast<int>(std::lround(sweep_value)) / 2;
      break;
    case ExperimentId::power:
      c.total_power_dbm = sweep_value;
      break;
    case ExperimentId::epsilon:
      break;
  }
  c.rng_seed = spec.seed ^ trial;
  return c;
}

OptimizerParams solver_for(const ExperimentSpec& spec, double sweep_value) {
  OptimizerParams p = spec.solver;
  if (spec.id == ExperimentId::epsilon) p.barrier.epsilon = sweep_value;
  return p;
}

TrialOutcome run_trial(const ExperimentSpec& spec, double sweep_value, std::uint64_t trial, bool collect_trace) {
  TrialOutcome out;
  try {
    const Scenario scenario = sample_scenario(config_for(spec, sweep_value, trial));
    OptimizerParams params = solver_for(spec, sweep_value);
    params.backend = LpBackend::barrier;
    auto& s = out.samples;

    const Solution proposed = timed(spec.timing, s[0].seconds, [&] { return optimize(scenario, params); });
    s[0].rate = proposed.sum_secrecy;
    s[0].iters = proposed.iterations;
    out.trajectory = proposed.trajectory;
    if (collect_trace) {
      for (std::size_t q = 0; q < proposed.lp_diagnostics.size(); ++q)
        for (const auto& row : proposed.lp_diagnostics[q].trace)
          out.trace.push_back(TraceLine{sweep_value, static_cast<int>(trial), static_cast<int>(q) + 1, row});
    }

    s[1].rate = timed(spec.timing, s[1].seconds, [&] {
      const auto pairs = ordered_pairs(scenario, proposed.pairing);
      const auto alloc = epa_allocation(pairs, scenario.budget, scenario.noise_power);
      return sum_secrecy(proposed.pairing, alloc);
    });

    s[2].rate = timed(spec.timing, s[2].seconds, [&] {
      Rng rng = Rng::for_trial(spec.seed, trial, kRandomPairingTag);
      return evaluate_pairing(scenario, random_pairing(scenario, rng)).sum_secrecy;
    });

    s[3].rate = timed(spec.timing, s[3].seconds,
                      [&] { return evaluate_pairing(scenario, gale_shapley_pairing(scenario)).sum_secrecy; });

    params.backend = LpBackend::simplex;
    const Solution simplex = timed(spec.timing, s[4].seconds, [&] { return optimize(scenario, params); });
    s[4].rate = simplex.sum_secrecy;
    s[4].iters = simplex.iterations;
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = describe(e);
  }
  return out;
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

ResultRow aggregate(std::string scheme, double sweep, std::span<const double> rates, std::span<const double> iters,
                    std::vector<double> seconds) {
  ResultRow r;
  r.scheme = std::move(scheme);
  r.sweep = sweep;
  r.mean_rate = mean_of(rates);
  r.std_rate = sample_std(rates);
  r.mean_iters = mean_of(iters);
  r.runtime_s = median_of(std::move(seconds));
  r.samples = static_cast<int>(rates.size());
  return r;
}

std::vector<TrialOutcome> run_point(const ExperimentSpec& spec, double sweep_value, bool collect_trace) {
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(spec.trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < spec.trials; t = next++)
      outcomes[static_cast<std::size_t>(t)] = run_trial(spec, sweep_value, static_cast<std::uint64_t>(t), collect_trace);
  };
  const int workers = std::min(spec.threads, spec.trials);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  return outcomes;
}

// Per-iteration trajectory rows; a trial that stopped early holds its last value.
void trajectory_rows(double sweep_value, std::span<const TrialOutcome> ok, std::vector<ResultRow>& rows) {
  std::size_t longest = 0;
  for (const auto& o : ok) longest = std::max(longest, o.trajectory.size());
  std::vector<double> iters, seconds;
  for (const auto& o : ok) {
    iters.push_back(o.samples[0].iters);
    seconds.push_back(o.samples[0].seconds);
  }
  const std::string scheme = "proposed_2K" + std::to_string(std::lround(sweep_value));
  for (std::size_t q = 0; q < longest; ++q) {
    std::vector<double> rates;
    for (const auto& o : ok) rates.push_back(o.trajectory[std::min(q, o.trajectory.size() - 1)]);
    rows.push_back(aggregate(scheme, static_cast<double>(q), rates, iters, seconds));
  }
}

void check_users(double v) {
  const double r = std::round(v);
  if (r != v || r < 2.0 || std::fmod(r, 2.0) != 0.0) throw InvalidArgument("sweep: user counts must be even and >= 2");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw InvalidArgument("config key '" + key + "': empty list entry");
    out.push_back(parse_config_double(key, item.substr(first, last - first + 1)));
  }
  return out;
}

}  // namespace

std::string_view experiment_name(ExperimentId id) {
  switch (id) {
    case ExperimentId::iters: return "iters";
    case ExperimentId::users: return "users";
    case ExperimentId::power: return "power";
    case ExperimentId::runtime: return "runtime";
    case ExperimentId::epsilon: return "epsilon";
  }
  return "?";
}

ExperimentId parse_experiment_id(std::string_view name) {
  for (auto id : {ExperimentId::iters, ExperimentId::users, ExperimentId::power, ExperimentId::runtime,
                  ExperimentId::epsilon})
    if (experiment_name(id) == name) return id;
  throw InvalidArgument("unknown experiment '" + std::string(name) + "'");
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
  if (sweep.empty()) throw InvalidArgument("sweep must not be empty");
  for (double v : sweep) {
    if (!std::isfinite(v)) throw InvalidArgument("sweep values must be finite");
    if (id == ExperimentId::iters || id == ExperimentId::users || id == ExperimentId::runtime) check_users(v);
    if (id == ExperimentId::epsilon && !(v > 0.0)) throw InvalidArgument("sweep: epsilon must be > 0");
  }
  base.validate();
  solver.barrier.validate();
  if (!(solver.eta > 0.0) || solver.max_outer < 1) throw InvalidArgument("eta must be > 0 and max_outer >= 1");
}

ExperimentSpec default_spec(ExperimentId id) {
  ExperimentSpec s;
  s.id = id;
  s.solver.barrier.epsilon = 1e8;
  switch (id) {
    case ExperimentId::iters: s.sweep = {6, 8, 10}; break;
    case ExperimentId::users: s.sweep = {4, 6, 8, 10, 12}; break;
    case ExperimentId::power: s.sweep = {10, 15, 20, 25, 30}; break;
    case ExperimentId::runtime:
      s.sweep = {4, 6, 8, 10, 12};
      s.timing = true;
      break;
    case ExperimentId::epsilon: s.sweep = {1e-4, 1e-2, 1, 1e2, 1e4, 1e6, 1e8}; break;
  }
  return s;
}

ExperimentSpec load_experiment_spec(ExperimentId id, const KeyValues& kv_in) {
  ExperimentSpec s = default_spec(id);
  KeyValues kv = kv_in;
  take_system_config(kv, s.base);
  auto take = [&](const char* key, auto&& apply) {
    if (auto it = kv.find(key); it != kv.end()) {
      apply(key, it->second);
      kv.erase(it);
    }
  };
  auto as_int = [](const std::string& key, const std::string& v) {
    const long long x = parse_config_int(key, v);
    if (x < -2147483647LL || x > 2147483647LL) throw InvalidArgument("config key '" + key + "': out of range");
    return static_cast<int>(x);
  };
  auto& b = s.solver.barrier;
  take("epsilon", [&](auto& k, auto& v) { b.epsilon = parse_config_double(k, v); });
  take("xi", [&](auto& k, auto& v) { b.xi = parse_config_double(k, v); });
  take("t0", [&](auto& k, auto& v) { b.t0 = parse_config_double(k, v); });
  take("rho", [&](auto& k, auto& v) { b.rho = parse_config_double(k, v); });
  take("zeta", [&](auto& k, auto& v) { b.zeta = parse_config_double(k, v); });
  take("tau", [&](auto& k, auto& v) { b.tau = parse_config_double(k, v); });
  take("max_updates", [&](auto& k, auto& v) { b.max_updates = as_int(k, v); });
  take("max_newton", [&](auto& k, auto& v) { b.max_newton = as_int(k, v); });
  take("eta", [&](auto& k, auto& v) { s.solver.eta = parse_config_double(k, v); });
  take("max_outer", [&](auto& k, auto& v) { s.solver.max_outer = as_int(k, v); });
  take("trials", [&](auto& k, auto& v) { s.trials = as_int(k, v); });
  take("threads", [&](auto& k, auto& v) { s.threads = as_int(k, v); });
  take("seed", [&](auto& k, auto& v) { s.seed = parse_config_u64(k, v); });
  take("sweep", [&](auto& k, auto& v) { s.sweep = parse_list(k, v); });
  if (!kv.empty()) throw InvalidArgument("unknown config key '" + kv.begin()->first + "'");
  s.validate();
  return s;
}

ExperimentSpec read_experiment_spec(ExperimentId id, const std::filesystem::path& path) {
  return load_experiment_spec(id, read_key_values(path));
}

ExperimentResult run_experiment(const ExperimentSpec& spec, bool collect_trace) {
  spec.validate();
  ExperimentResult result;
  for (double v : spec.sweep) {
    const auto outcomes = run_point(spec, v, collect_trace);
    std::vector<TrialOutcome> ok;
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
      ++result.trials_total;
      if (outcomes[t].ok) {
        ok.push_back(outcomes[t]);
      } else {
        ++result.trials_failed;
        result.failures.push_back("sweep " + format_double(v) + ", trial " + std::to_string(t) + ": " +
                                  outcomes[t].error);
      }
    }
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
      const auto& o = outcomes[t];
      if (!o.ok) continue;
      TrialRecord rec;
      rec.sweep = v;
      rec.trial = static_cast<int>(t);
      for (std::size_t k = 0; k < std::size(kSchemes); ++k) {
        rec.rate[k] = o.samples[k].rate;
        rec.iters[k] = o.samples[k].iters;
        rec.seconds[k] = o.samples[k].seconds;
      }
      result.records.push_back(rec);
      result.trace.insert(result.trace.end(), o.trace.begin(), o.trace.end());
    }

    if (spec.id == ExperimentId::iters) {
      trajectory_rows(v, ok, result.rows);
      continue;
    }
    for (std::size_t k = 0; k < std::size(kSchemes); ++k) {
      std::vector<double> rates, iters, seconds;
      for (const auto& o : ok) {
        rates.push_back(o.samples[k].rate);
        iters.push_back(o.samples[k].iters);
        seconds.push_back(o.samples[k].seconds);
      }
      result.rows.push_back(aggregate(std::string(kSchemes[k]), v, rates, iters, std::move(seconds)));
    }
  }
  return result;
}

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("format_double: conversion failed");
  return std::string(buf, end);
}

void write_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "scheme,sweep,mean_rate,std_rate,mean_iters,runtime_s\n";
  for (const auto& r : rows)
    out << r.scheme << ',' << format_double(r.sweep) << ',' << format_double(r.mean_rate) << ','
        << format_double(r.std_rate) << ',' << format_double(r.mean_iters) << ',' << format_double(r.runtime_s)
        << '\n';
}

void write_trace_csv(std::ostream& out, std::span<const TraceLine> lines) {
  out << "sweep,trial,outer,update,t,residual,step,min_slack\n";
  for (const auto& l : lines)
    out << format_double(l.sweep) << ',' << l.trial << ',' << l.outer << ',' << l.row.update << ','
        << format_double(l.row.t) << ',' << format_double(l.row.residual) << ',' << format_double(l.row.step) << ','
        << format_double(l.row.min_slack) << '\n';
}

}  // namespace noma
