#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dircoord/belief.hpp"
#include "dircoord/measurements.hpp"

namespace dircoord {

// Defaults follow the simulation noise table: 0.1 m range, 0.8 rad
// azimuth/elevation, 0.1 m/s² accelerometer, 5 m / 3 m/s initial position and
// velocity spread, 10 Hz measurements.
struct NoiseConfig {
  double range_std = 0.1;
  double ae_std = 0.8;
  double accel_std = 0.1;
  double init_pos_std = 5.0;
  double init_vel_std = 3.0;
  double meas_frequency = 10.0;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  double duration = 60.0;
  double prediction_rate = 100.0;
  bool run_dckf = true;
  bool run_ekf = true;
  bool use_range = true;
  bool use_ae = true;
  bool synthesize_ae = false;  // replay: simulate AE from truth where the log has none
  std::size_t replay_trial = 0;
  double dckf_q_scale = 1.0;
  double ekf_q_scale = 1.0;
  SigmaScheme sigma_scheme = SigmaScheme::SphericalCubature;
  AeConversion ae_conversion = AeConversion::Linearized;  // DCKF azimuth/elevation handling
  std::size_t pf_particles = 10000;
  int knn_k = 5;
  std::size_t kl_samples = 5000;
  double prior_range_min = 2.0;
  double prior_range_max = 20.0;
  double prior_sigma_min = 0.5;
  double prior_sigma_max = 3.0;
  int threads = 0;  // 0: OpenMP default
};

struct ScenarioConfig {
  NoiseConfig noise;
  RunConfig run;

  // Throws ConfigError on invalid values.
  void validate() const;
  // Canonical `[section]` / `key = value` text; parse(serialize(c)) == c.
  std::string serialize() const;
  std::uint64_t hash() const;
  std::size_t steps_per_measurement() const;
};

// Format: `[noise]` / `[run]` headers, `key = value` lines, `#` comments.
// Unknown keys and malformed lines throw ConfigError naming the line.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

// Worker count: DIRCOORD_THREADS if set, else config.run.threads, else 0.
int resolve_threads(const ScenarioConfig& config);

}  // namespace dircoord
