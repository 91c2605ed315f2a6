#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dircoord/config.hpp"
#include "dircoord/filters.hpp"
#include "dircoord/metrics.hpp"
#include "dircoord/replay_log.hpp"

namespace dircoord {

// Smooth trajectory r(t) = r₀ + Σⱼ Aⱼ ⊙ (sin(ωⱼ t + φⱼ) - sin φⱼ), three
// sinusoids per axis.
struct Trajectory {
  Vec3 r0 = Vec3::Zero();
  std::array<Vec3, 3> amplitude{};
  std::array<Vec3, 3> omega{};
  std::array<Vec3, 3> phase{};

  Vec3 position(double t) const;
  Vec3 velocity(double t) const;
  Vec3 acceleration(double t) const;
};

// Starts 8–12 m from the origin; resampled until 1 m <= |r(t)| <= 30 m on the
// prediction grid. Throws RejectionLimit after 100 attempts.
Trajectory generate_trajectory(const ScenarioConfig& config, std::uint64_t seed);

// Prediction-grid timestamps k / prediction_rate, k = 0..round(duration·rate).
std::vector<double> time_grid(const ScenarioConfig& config);

// Per-trial streams derived from the master seed.
struct TrialSeeds {
  std::uint64_t trajectory;
  std::uint64_t sensors;
  std::uint64_t prior;
  std::uint64_t particles;
};
TrialSeeds trial_seeds(std::uint64_t master, std::size_t trial);

// Initial Cartesian belief: mean = truth + N(0, diag(σp², σv²)), cov = that diagonal.
CartGaussian make_prior(const Vec3& r_true, const Vec3& v_true, const NoiseConfig& noise, std::uint64_t seed);

// Noisy accelerometer and range/AE measurements along a trajectory, written as
// a replay log with truth columns.
ReplayLog simulate_log(const Trajectory& traj, const ScenarioConfig& config, std::uint64_t sensor_seed);

struct FilterSample {
  Vec3 r_hat = Vec3::Zero();
  Vec3 v_hat = Vec3::Zero();
  Vec6 error_state = Vec6::Zero();  // filter's own error coordinates (truth - estimate)
  Vec6 cov_diag = Vec6::Zero();     // filter's own covariance diagonal
  ConsistencyRecord metrics;

  bool operator==(const FilterSample& o) const;
};

struct TrialRecord {
  std::vector<double> t;
  std::vector<Vec3> r_true;
  std::vector<Vec3> v_true;
  std::vector<FilterSample> dckf;
  std::vector<FilterSample> ekf;
  bool has_truth = false;
  std::size_t dckf_clamps = 0;
  std::size_t dckf_skipped_updates = 0;
  std::size_t ekf_skipped_updates = 0;

  bool operator==(const TrialRecord& o) const;
};

// Runs both filters over a log from the given prior. Rows with an empty
// measurement column skip that update; range is applied before AE. Updates
// that fail numerically (singular innovation, origin/pole singularities)
// are skipped and counted.
TrialRecord run_trial(const ReplayLog& log, const CartGaussian& prior, const ScenarioConfig& config,
                      std::uint64_t synth_seed = 0);

struct DynamicStudyResult {
  ScenarioConfig config;
  std::vector<TrialRecord> trials;
  std::vector<ReplayLog> logs;
  AggregateSeries dckf;
  AggregateSeries ekf;
  double error_reduction_percent = 0.0;
};

DynamicStudyResult run_dynamic_study(const ScenarioConfig& config);

struct ReplayResult {
  ScenarioConfig config;
  TrialRecord record;
  double dckf_pos_rmse = 0.0;
  double dckf_vel_rmse = 0.0;
  double ekf_pos_rmse = 0.0;
  double ekf_vel_rmse = 0.0;
  double dckf_mean_nees = 0.0;
  double ekf_mean_nees = 0.0;
};

// Replays a log. With truth in the first row the prior is drawn exactly as the
// dynamic study does for trial config.run.replay_trial; otherwise it is built
// from the first row holding both range and AE (zero velocity).
ReplayResult run_replay(const ReplayLog& log, const ScenarioConfig& config);

struct SingleCorrectionTrial {
  double dckf_mahalanobis = 0.0;
  double ekf_mahalanobis = 0.0;
  double dckf_error = 0.0;
  double ekf_error = 0.0;
  double dckf_kl = 0.0;
  double ekf_kl = 0.0;
  double prior_range = 0.0;
  double prior_sigma_max = 0.0;
};

struct SingleCorrectionSetup {
  CartGaussian prior;
  Vec3 r_true = Vec3::Zero();
  RangeMeas meas;
};

// Randomized prior (uniform direction, range and per-axis sigma per config,
// random orientation), truth sampled from it, one range measurement.
SingleCorrectionSetup make_single_correction_setup(const ScenarioConfig& config, std::uint64_t seed);

struct SingleCorrectionClouds {
  MatrixXd pf;    // 3 × kl_samples
  MatrixXd dckf;
  MatrixXd ekf;
};

// With compute_kl = false the particle filter and divergences are skipped.
SingleCorrectionTrial run_single_correction_trial(const SingleCorrectionSetup& setup, const ScenarioConfig& config,
                                                  std::uint64_t pf_seed, bool compute_kl = true,
                                                  SingleCorrectionClouds* clouds = nullptr);

struct SingleCorrectionResult {
  ScenarioConfig config;
  std::vector<SingleCorrectionTrial> trials;
  SingleCorrectionClouds example_clouds;  // clouds of trial 0
};

SingleCorrectionResult run_single_correction_study(const ScenarioConfig& config);

double median(std::vector<double> values);

}  // namespace dircoord
