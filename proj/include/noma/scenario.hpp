#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace noma {

/// Parameters of one simulated cell. Defaults are the reference setup:
/// 300 m disc, path-loss exponent 3, 0.5 MHz band, -174 dBm/Hz, 20 dBm.
struct SystemConfig {
  int num_pairs = 4;  ///< K; the cell holds 2K users
  double cell_radius = 300.0;
  double path_loss_exponent = 3.0;
  double bandwidth = 5e5;
  double noise_psd_dbm_per_hz = -174.0;
  double total_power_dbm = 20.0;
  std::uint64_t rng_seed = 1;

  int num_users() const { return 2 * num_pairs; }
  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct UserChannel {
  int user_id = 0;  ///< 1-based
  double distance = 0.0;
  double fading_coeff_sq = 0.0;
  double gain_sq = 0.0;
};

/// One immutable network instance.
struct Scenario {
  SystemConfig config;
  std::vector<UserChannel> users;
  double noise_power = 0.0;  ///< watts
  double budget = 0.0;       ///< watts

  int num_pairs() const { return config.num_pairs; }
  int num_users() const { return static_cast<int>(users.size()); }
  /// Channel gain of a 1-based user id.
  double gain(int user_id) const { return users.at(static_cast<std::size_t>(user_id - 1)).gain_sq; }
};

/// Users closer than this are clipped to it.
inline constexpr double kMinDistance = 1.0;
/// Relative jitter separating users whose gains coincide.
inline constexpr double kTieJitter = 1e-12;

double dbm_to_watts(double dbm);
double noise_power(double psd_dbm_per_hz, double bandwidth);

/// |h|^2 = |g|^2 d^(-2 * exponent).
double path_gain(double fading_coeff_sq, double distance, double path_loss_exponent);

/// Draws a scenario from config.rng_seed.
Scenario sample_scenario(const SystemConfig& config);

/// Builds a scenario from explicit distances and fading draws (sizes must be
/// 2K). Applies clipping and tie separation like sample_scenario.
Scenario make_scenario(const SystemConfig& config, const std::vector<double>& distances,
                       const std::vector<double>& fading_coeff_sq);

/// Builds a scenario directly from channel gains, bypassing geometry.
/// Distances are reported as 0. Used by tests and tools.
Scenario scenario_from_gains(const SystemConfig& config, const std::vector<double>& gains);

// ---- flat key = value configuration files ----

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// skipped; a repeated key or a line without '=' is an InvalidArgument.
KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::filesystem::path& path);

/// Value parsers shared by config readers; errors name the key.
double parse_config_double(const std::string& key, const std::string& value);
long long parse_config_int(const std::string& key, const std::string& value);
std::uint64_t parse_config_u64(const std::string& key, const std::string& value);

/// Moves every SystemConfig key found in kv into config and erases it from kv.
/// Keys are the field names of SystemConfig.
void take_system_config(KeyValues& kv, SystemConfig& config);

/// Reads a file holding only SystemConfig keys; unknown keys are rejected.
SystemConfig read_system_config(const std::filesystem::path& path);

}  // namespace noma
