#include "noma/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "noma/errors.hpp"
#include "noma/rng.hpp"

namespace noma {

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
}

// Nudges later-indexed users upward until all gains are pairwise distinct.
void separate_ties(std::vector<UserChannel>& users) {
  const std::size_t n = users.size();
  for (int pass = 0; pass < 64; ++pass) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return users[a].gain_sq < users[b].gain_sq; });
    bool changed = false;
    for (std::size_t i = 1; i < n; ++i) {
      auto& a = users[order[i - 1]];
      auto& b = users[order[i]];
      if (nearly_equal(a.gain_sq, b.gain_sq)) {
        auto& later = a.user_id > b.user_id ? a : b;
        later.gain_sq *= 1.0 + kTieJitter;
        changed = true;
      }
    }
    if (!changed) return;
  }
  throw ConvergenceError("could not separate tied channel gains");
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("config key '" + key + "': not a number: " + value);
  }
  if (used != value.size()) throw InvalidArgument("config key '" + key + "': trailing characters in " + value);
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw InvalidArgument("config key '" + key + "': not an integer: " + value);
  return out;
}

}  // namespace

double parse_config_double(const std::string& key, const std::string& value) { return parse_double(key, value); }
long long parse_config_int(const std::string& key, const std::string& value) {
  return parse_int<long long>(key, value);
}
std::uint64_t parse_config_u64(const std::string& key, const std::string& value) {
  return parse_int<std::uint64_t>(key, value);
}

void SystemConfig::validate() const {
  if (num_pairs < 1) throw InvalidArgument("num_pairs must be >= 1");
  if (!finite_positive(cell_radius)) throw InvalidArgument("cell_radius must be > 0");
  if (!finite_positive(path_loss_exponent)) throw InvalidArgument("path_loss_exponent must be > 0");
  if (!finite_positive(bandwidth)) throw InvalidArgument("bandwidth must be > 0");
  if (!std::isfinite(noise_psd_dbm_per_hz) || !std::isfinite(total_power_dbm))
    throw InvalidArgument("power levels must be finite");
  if (!finite_positive(noise_power(noise_psd_dbm_per_hz, bandwidth)))
    throw InvalidArgument("noise power underflows or overflows");
  if (!finite_positive(dbm_to_watts(total_power_dbm))) throw InvalidArgument("power budget underflows or overflows");
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double noise_power(double psd_dbm_per_hz, double bandwidth) {
  if (!(bandwidth > 0.0)) throw InvalidArgument("bandwidth must be > 0");
  return dbm_to_watts(psd_dbm_per_hz + 10.0 * std::log10(bandwidth));
}

double path_gain(double fading_coeff_sq, double distance, double path_loss_exponent) {
  return fading_coeff_sq * std::pow(distance, -2.0 * path_loss_exponent);
}

Scenario make_scenario(const SystemConfig& config, const std::vector<double>& distances,
                       const std::vector<double>& fading_coeff_sq) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.num_users());
  if (distances.size() != n || fading_coeff_sq.size() != n)
    throw InvalidArgument("expected one distance and one fading draw per user");

  Scenario s;
  s.config = config;
  s.noise_power = noise_power(config.noise_psd_dbm_per_hz, config.bandwidth);
  s.budget = dbm_to_watts(config.total_power_dbm);
  s.users.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    UserChannel u;
    u.user_id = static_cast<int>(k) + 1;
    u.distance = std::clamp(distances[k], kMinDistance, config.cell_radius);
    u.fading_coeff_sq = fading_coeff_sq[k];
    u.gain_sq = path_gain(u.fading_coeff_sq, u.distance, config.path_loss_exponent);
    s.users.push_back(u);
  }
  separate_ties(s.users);
  return s;
}

Scenario sample_scenario(const SystemConfig& config) {
  config.validate();
  Rng rng(config.rng_seed);
  const auto n = static_cast<std::size_t>(config.num_users());
  std::vector<double> distances(n);
  std::vector<double> fading(n);
  for (std::size_t k = 0; k < n; ++k) {
    distances[k] = config.cell_radius * std::sqrt(rng.uniform());
    fading[k] = rng.exponential();
  }
  return make_scenario(config, distances, fading);
}

Scenario scenario_from_gains(const SystemConfig& config, const std::vector<double>& gains) {
  config.validate();
  if (gains.size() != static_cast<std::size_t>(config.num_users()))
    throw InvalidArgument("expected one gain per user");
  Scenario s;
  s.config = config;
  s.noise_power = noise_power(config.noise_psd_dbm_per_hz, config.bandwidth);
  s.budget = dbm_to_watts(config.total_power_dbm);
  for (std::size_t k = 0; k < gains.size(); ++k) {
    if (!finite_positive(gains[k])) throw InvalidArgument("channel gains must be finite and positive");
    s.users.push_back(UserChannel{static_cast<int>(k) + 1, 0.0, gains[k], gains[k]});
  }
  separate_ties(s.users);
  return s;
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) throw InvalidArgument("config key '" + key + "' repeated");
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path.string());
  return parse_key_values(in);
}

void take_system_config(KeyValues& kv, SystemConfig& config) {
  auto take = [&](const char* key, auto&& apply) {
    if (auto it = kv.find(key); it != kv.end()) {
      apply(it->second);
      kv.erase(it);
    }
  };
  take("num_pairs", [&](const std::string& v) { config.num_pairs = parse_int<int>("num_pairs", v); });
  take("cell_radius", [&](const std::string& v) { config.cell_radius = parse_double("cell_radius", v); });
  take("path_loss_exponent",
       [&](const std::string& v) { config.path_loss_exponent = parse_double("path_loss_exponent", v); });
  take("bandwidth", [&](const std::string& v) { config.bandwidth = parse_double("bandwidth", v); });
  take("noise_psd_dbm_per_hz",
       [&](const std::string& v) { config.noise_psd_dbm_per_hz = parse_double("noise_psd_dbm_per_hz", v); });
  take("total_power_dbm", [&](const std::string& v) { config.total_power_dbm = parse_double("total_power_dbm", v); });
  take("rng_seed", [&](const std::string& v) { config.rng_seed = parse_int<std::uint64_t>("rng_seed", v); });
}

SystemConfig read_system_config(const std::filesystem::path& path) {
  KeyValues kv = read_key_values(path);
  SystemConfig config;
  take_system_config(kv, config);
  if (!kv.empty()) throw InvalidArgument("unknown config key '" + kv.begin()->first + "'");
  config.validate();
  return config;
}

}  // namespace noma
