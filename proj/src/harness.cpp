#include "dircoord/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <omp.h>

#include "dircoord/error.hpp"
#include "dircoord/random.hpp"

namespace dircoord {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

template <typename Derived>
bool same_bits(const Eigen::MatrixBase<Derived>& a, const Eigen::MatrixBase<Derived>& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!same_bits(a(i), b(i))) return false;
  }
  return true;
}

bool same_bits(const ConsistencyRecord& a, const ConsistencyRecord& b) {
  return same_bits(a.timestamp, b.timestamp) && same_bits(a.nees, b.nees) && same_bits(a.mahalanobis, b.mahalanobis) &&
         same_bits(a.err_norm, b.err_norm) && same_bits(a.pos_err, b.pos_err) && same_bits(a.vel_err, b.vel_err);
}

Vec3 random_unit(Rng& rng) {
  Vec3 g;
  do {
    for (int i = 0; i < 3; ++i) g(i) = standard_normal(rng);
  } while (g.norm() < 1e-9);
  return g.normalized();
}

Mat3 accel_psd(const ScenarioConfig& config, double q_scale) {
  const double sigma = config.noise.accel_std;
  return q_scale * sigma * sigma / config.run.prediction_rate * Mat3::Identity();
}

// Runs `body(i)` for i in [0, n) across the worker pool and rethrows the
// first failure (lowest index) after the join.
template <typename Body>
void parallel_trials(std::size_t n, int threads, Body body) {
  std::vector<std::exception_ptr> errors(n);
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(team)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename Filter>
FilterSample sample_metrics(const Filter& f, const Vec6& err, const MatrixXd& p, double t, const Vec3& r_err,
                            const Vec3& v_err) {
  FilterSample s;
  s.error_state = err;
  s.cov_diag = p.diagonal();
  s.metrics.timestamp = t;
  try {
    s.metrics.nees = nees(err, p);
    s.metrics.mahalanobis = std::sqrt(s.metrics.nees);
  } catch (const Error&) {
    s.metrics.nees = kNaN;
    s.metrics.mahalanobis = kNaN;
  }
  s.metrics.pos_err = r_err.norm();
  s.metrics.vel_err = v_err.norm();
  s.metrics.err_norm = std::sqrt(r_err.squaredNorm() + v_err.squaredNorm());
  (void)f;
  return s;
}

template <typename Filter, typename Meas>
void guarded_correct(Filter& f, const Meas& m, std::size_t& skipped) {
  try {
    f.correct(m);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::SingularInnovation:
      case ErrorKind::OriginSingularity:
      case ErrorKind::GimbalPole:
        ++skipped;
        break;
      default:
        throw;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Trajectories and simulation

Vec3 Trajectory::position(double t) const {
  Vec3 r = r0;
  for (std::size_t j = 0; j < 3; ++j) {
    for (int c = 0; c < 3; ++c) {
      r(c) += amplitude[j](c) * (std::sin(omega[j](c) * t + phase[j](c)) - std::sin(phase[j](c)));
    }
  }
  return r;
}

Vec3 Trajectory::velocity(double t) const {
  Vec3 v = Vec3::Zero();
  for (std::size_t j = 0; j < 3; ++j) {
    for (int c = 0; c < 3; ++c) {
      v(c) += amplitude[j](c) * omega[j](c) * std::cos(omega[j](c) * t + phase[j](c));
    }
  }
  return v;
}

Vec3 Trajectory::acceleration(double t) const {
  Vec3 a = Vec3::Zero();
  for (std::size_t j = 0; j < 3; ++j) {
    for (int c = 0; c < 3; ++c) {
      const double w = omega[j](c);
      a(c) -= amplitude[j](c) * w * w * std::sin(w * t + phase[j](c));
    }
  }
  return a;
}

std::vector<double> time_grid(const ScenarioConfig& config) {
  const auto steps = static_cast<std::size_t>(std::llround(config.run.duration * config.run.prediction_rate));
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    t[k] = static_cast<double>(k) / config.run.prediction_rate;
  }
  return t;
}

Trajectory generate_trajectory(const ScenarioConfig& config, std::uint64_t seed) {
  const std::vector<double> grid = time_grid(config);
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng(derive_seed(seed, attempt, 7));
    Trajectory traj;
    traj.r0 = uniform(rng, 8.0, 12.0) * random_unit(rng);
    for (std::size_t j = 0; j < 3; ++j) {
      for (int c = 0; c < 3; ++c) {
        traj.amplitude[j](c) = uniform(rng, 0.5, 3.0);
        traj.omega[j](c) = uniform(rng, 0.1, 0.8);
        traj.phase[j](c) = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      }
    }
    const bool ok = std::all_of(grid.begin(), grid.end(), [&](double t) {
      const double rho = traj.position(t).norm();
      return rho >= 1.0 && rho <= 30.0;
    });
    if (ok) return traj;
  }
  throw Error(ErrorKind::RejectionLimit, "no trajectory within 1-30 m after 100 attempts");
}

TrialSeeds trial_seeds(std::uint64_t master, std::size_t trial) {
  return {derive_seed(master, trial, 1), derive_seed(master, trial, 2), derive_seed(master, trial, 3),
          derive_seed(master, trial, 4)};
}

CartGaussian make_prior(const Vec3& r_true, const Vec3& v_true, const NoiseConfig& noise, std::uint64_t seed) {
  Rng rng(seed);
  CartGaussian prior;
  prior.mean.resize(6);
  prior.cov = MatrixXd::Zero(6, 6);
  for (int i = 0; i < 3; ++i) {
    prior.mean(i) = r_true(i) + noise.init_pos_std * standard_normal(rng);
    prior.cov(i, i) = noise.init_pos_std * noise.init_pos_std;
  }
  for (int i = 0; i < 3; ++i) {
    prior.mean(3 + i) = v_true(i) + noise.init_vel_std * standard_normal(rng);
    prior.cov(3 + i, 3 + i) = noise.init_vel_std * noise.init_vel_std;
  }
  return prior;
}

ReplayLog simulate_log(const Trajectory& traj, const ScenarioConfig& config, std::uint64_t sensor_seed) {
  Rng rng(sensor_seed);
  const std::vector<double> grid = time_grid(config);
  const std::size_t every = config.steps_per_measurement();
  ReplayLog log;
  log.rows.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    ReplayRow row;
    row.t = t;
    const Vec3 r = traj.position(t);
    row.r_true = r;
    row.v_true = traj.velocity(t);
    // Mean acceleration over the step, so integrating the noiseless signal reproduces v exactly.
    const Vec3 a = k + 1 < grid.size() ? Vec3((traj.velocity(grid[k + 1]) - traj.velocity(t)) / (grid[k + 1] - t))
                                       : traj.acceleration(t);
    for (int i = 0; i < 3; ++i) row.accel(i) = a(i) + config.noise.accel_std * standard_normal(rng);
    if (k > 0 && k % every == 0) {
      if (config.run.use_range) {
        row.range = simulate_range(r, config.noise.range_std, rng).y;
      }
      if (config.run.use_ae) {
        const AeMeas ae = simulate_ae(r, config.noise.ae_std, rng);
        row.alpha = ae.alpha;
        row.epsilon = ae.epsilon;
      }
    }
    log.rows.push_back(std::move(row));
  }
  return log;
}

// ---------------------------------------------------------------------------
// Trial records

bool FilterSample::operator==(const FilterSample& o) const {
  return same_bits(r_hat, o.r_hat) && same_bits(v_hat, o.v_hat) && same_bits(error_state, o.error_state) &&
         same_bits(cov_diag, o.cov_diag) && same_bits(metrics, o.metrics);
}

bool TrialRecord::operator==(const TrialRecord& o) const {
  if (t.size() != o.t.size() || has_truth != o.has_truth || dckf_clamps != o.dckf_clamps ||
      dckf_skipped_updates != o.dckf_skipped_updates || ekf_skipped_updates != o.ekf_skipped_updates ||
      dckf != o.dckf || ekf != o.ekf || r_true.size() != o.r_true.size()) {
    return false;
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!same_bits(t[i], o.t[i])) return false;
  }
  for (std::size_t i = 0; i < r_true.size(); ++i) {
    if (!same_bits(r_true[i], o.r_true[i]) || !same_bits(v_true[i], o.v_true[i])) return false;
  }
  return true;
}

TrialRecord run_trial(const ReplayLog& log, const CartGaussian& prior, const ScenarioConfig& config,
                      std::uint64_t synth_seed) {
  if (log.rows.empty()) {
    throw Error(ErrorKind::ParseError, "log has no rows");
  }
  std::optional<Dckf> dckf;
  std::optional<CartEkf> ekf;
  if (config.run.run_dckf) {
    dckf.emplace(Dckf::from_cartesian_prior(prior, accel_psd(config, config.run.dckf_q_scale), config.run.sigma_scheme));
    dckf->set_ae_conversion(config.run.ae_conversion);
  }
  if (config.run.run_ekf) {
    ekf.emplace(CartEkf::from_cartesian_prior(prior, accel_psd(config, config.run.ekf_q_scale)));
  }
  Rng synth(synth_seed);
  const double range_var = config.noise.range_std * config.noise.range_std;
  const Mat2 ae_cov = config.noise.ae_std * config.noise.ae_std * Mat2::Identity();

  TrialRecord rec;
  rec.has_truth = log.rows.front().r_true.has_value() && log.rows.front().v_true.has_value();
  for (std::size_t k = 0; k < log.rows.size(); ++k) {
    const ReplayRow& row = log.rows[k];
    if (k > 0) {
      const double dt = row.t - log.rows[k - 1].t;
      if (!(dt > 0.0)) {
        throw Error(ErrorKind::NonMonotoneTime, "row " + std::to_string(k + 1) + ": time does not increase");
      }
      const Vec3& accel = log.rows[k - 1].accel;
      if (dckf) dckf->predict(accel, dt);
      if (ekf) ekf->predict(accel, dt);
    }

    std::optional<AeMeas> ae;
    if (row.alpha && row.epsilon) {
      ae = AeMeas{*row.alpha, *row.epsilon, ae_cov};
    } else if (config.run.synthesize_ae && row.range && row.r_true) {
      ae = simulate_ae(*row.r_true, config.noise.ae_std, synth);
    }
    if (row.range) {
      const RangeMeas rm{*row.range, range_var};
      if (dckf) guarded_correct(*dckf, rm, rec.dckf_skipped_updates);
      if (ekf) guarded_correct(*ekf, rm, rec.ekf_skipped_updates);
    }
    if (ae) {
      if (dckf) guarded_correct(*dckf, *ae, rec.dckf_skipped_updates);
      if (ekf) guarded_correct(*ekf, *ae, rec.ekf_skipped_updates);
    }

    rec.t.push_back(row.t);
    const bool truth = row.r_true && row.v_true;
    if (truth) {
      rec.r_true.push_back(*row.r_true);
      rec.v_true.push_back(*row.v_true);
    }
    if (dckf) {
      FilterSample s;
      const Vec3 r_hat = dckf->state().position();
      const Vec3 v_hat = dckf->state().v;
      if (truth) {
        s = sample_metrics(*dckf, dckf->error_to_truth(*row.r_true, *row.v_true), dckf->covariance(), row.t,
                           *row.r_true - r_hat, *row.v_true - v_hat);
      } else {
        s.cov_diag = dckf->covariance().diagonal();
        s.metrics.timestamp = row.t;
        s.metrics.nees = s.metrics.mahalanobis = s.metrics.err_norm = s.metrics.pos_err = s.metrics.vel_err = kNaN;
      }
      s.r_hat = r_hat;
      s.v_hat = v_hat;
      rec.dckf.push_back(s);
    }
    if (ekf) {
      FilterSample s;
      const Vec3 r_hat = ekf->state().r;
      const Vec3 v_hat = ekf->state().v;
      if (truth) {
        s = sample_metrics(*ekf, ekf->error_to_truth(*row.r_true, *row.v_true), ekf->covariance(), row.t,
                           *row.r_true - r_hat, *row.v_true - v_hat);
      } else {
        s.cov_diag = ekf->covariance().diagonal();
        s.metrics.timestamp = row.t;
        s.metrics.nees = s.metrics.mahalanobis = s.metrics.err_norm = s.metrics.pos_err = s.metrics.vel_err = kNaN;
      }
      s.r_hat = r_hat;
      s.v_hat = v_hat;
      rec.ekf.push_back(s);
    }
  }
  if (dckf) rec.dckf_clamps = dckf->clamp_count();
  return rec;
}

// ---------------------------------------------------------------------------
// Dynamic study

DynamicStudyResult run_dynamic_study(const ScenarioConfig& config) {
  config.validate();
  DynamicStudyResult result;
  result.config = config;
  const std::size_t n = config.run.trials;
  result.trials.resize(n);
  result.logs.resize(n);
  parallel_trials(n, resolve_threads(config), [&](std::size_t i) {
    const TrialSeeds seeds = trial_seeds(config.run.seed, i);
    const Trajectory traj = generate_trajectory(config, seeds.trajectory);
    ReplayLog log = simulate_log(traj, config, seeds.sensors);
    const CartGaussian prior = make_prior(*log.rows.front().r_true, *log.rows.front().v_true, config.noise, seeds.prior);
    result.trials[i] = run_trial(log, prior, config, seeds.particles);
    result.logs[i] = std::move(log);
  });

  auto streams = [&](bool dckf) {
    std::vector<std::vector<ConsistencyRecord>> out;
    for (const TrialRecord& tr : result.trials) {
      std::vector<ConsistencyRecord> s;
      for (const FilterSample& f : dckf ? tr.dckf : tr.ekf) s.push_back(f.metrics);
      out.push_back(std::move(s));
    }
    return out;
  };
  if (config.run.run_dckf) result.dckf = aggregate_trials(streams(true), 6);
  if (config.run.run_ekf) result.ekf = aggregate_trials(streams(false), 6);
  if (config.run.run_dckf && config.run.run_ekf) {
    result.error_reduction_percent = error_reduction_percent(result.dckf, result.ekf);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Replay

ReplayResult run_replay(const ReplayLog& log, const ScenarioConfig& config) {
  config.validate();
  if (log.rows.empty()) {
    throw Error(ErrorKind::ParseError, "log has no rows");
  }
  const TrialSeeds seeds = trial_seeds(config.run.seed, config.run.replay_trial);
  const ReplayRow& first = log.rows.front();
  CartGaussian prior;
  if (first.r_true && first.v_true) {
    prior = make_prior(*first.r_true, *first.v_true, config.noise, seeds.prior);
  } else {
    const auto it = std::find_if(log.rows.begin(), log.rows.end(),
                                 [](const ReplayRow& r) { return r.range && r.alpha && r.epsilon; });
    if (it == log.rows.end()) {
      throw Error(ErrorKind::ParseError, "log has neither truth nor a range+AE row to initialize from");
    }
    prior.mean = VectorXd::Zero(6);
    prior.mean.head<3>() = *it->range * ae_to_direction(*it->alpha, *it->epsilon);
    prior.cov = MatrixXd::Zero(6, 6);
    prior.cov.topLeftCorner(3, 3).diagonal().setConstant(config.noise.init_pos_std * config.noise.init_pos_std);
    prior.cov.bottomRightCorner(3, 3).diagonal().setConstant(config.noise.init_vel_std * config.noise.init_vel_std);
  }

  ReplayResult out;
  out.config = config;
  out.record = run_trial(log, prior, config, seeds.particles);
  if (out.record.has_truth) {
    auto summarize = [](const std::vector<FilterSample>& s, double& pos, double& vel, double& mean_nees) {
      if (s.empty()) return;
      double p = 0.0, v = 0.0, n = 0.0;
      for (const FilterSample& f : s) {
        p += f.metrics.pos_err * f.metrics.pos_err;
        v += f.metrics.vel_err * f.metrics.vel_err;
        n += f.metrics.nees;
      }
      const double count = static_cast<double>(s.size());
      pos = std::sqrt(p / count);
      vel = std::sqrt(v / count);
      mean_nees = n / count;
    };
    summarize(out.record.dckf, out.dckf_pos_rmse, out.dckf_vel_rmse, out.dckf_mean_nees);
    summarize(out.record.ekf, out.ekf_pos_rmse, out.ekf_vel_rmse, out.ekf_mean_nees);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Single-correction study

SingleCorrectionSetup make_single_correction_setup(const ScenarioConfig& config, std::uint64_t seed) {
  const RunConfig& run = config.run;
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng(derive_seed(seed, attempt, 11));
    const double range = uniform(rng, run.prior_range_min, run.prior_range_max);
    const Vec3 mean = range * random_unit(rng);
    // Keep every cubature point on the mean's side of the origin.
    const double sigma_hi = std::min(run.prior_sigma_max, range / 4.0);
    const double sigma_lo = std::min(run.prior_sigma_min, sigma_hi);
    Vec3 sigma;
    for (int i = 0; i < 3; ++i) sigma(i) = uniform(rng, sigma_lo, sigma_hi);
    const Vec3 axis = random_unit(rng);
    const Mat3 q = exp_so3(uniform(rng, 0.0, std::numbers::pi) * axis).matrix();
    const Mat3 cov = q * sigma.cwiseAbs2().asDiagonal() * q.transpose();

    SingleCorrectionSetup setup;
    setup.prior.mean = mean;
    setup.prior.cov = 0.5 * (cov + cov.transpose());
    const MatrixXd l = covariance_factor(setup.prior.cov);
    Vec3 z;
    for (int i = 0; i < 3; ++i) z(i) = standard_normal(rng);
    setup.r_true = mean + l * z;
    setup.meas = simulate_range(setup.r_true, config.noise.range_std, rng);
    try {
      (void)cart_to_dir(setup.prior, run.sigma_scheme);
      (void)error_to_point(from_cartesian(mean), setup.r_true);
    } catch (const Error&) {
      continue;
    }
    return setup;
  }
  throw Error(ErrorKind::RejectionLimit, "no valid single-correction prior after 100 attempts");
}

namespace {

MatrixXd to_matrix(const std::vector<Vec3>& pts) {
  MatrixXd m(3, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = pts[i];
  return m;
}

MatrixXd to_matrix(const std::vector<VectorXd>& pts) {
  MatrixXd m(pts.front().size(), static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = pts[i];
  return m;
}

}  // namespace

SingleCorrectionTrial run_single_correction_trial(const SingleCorrectionSetup& setup, const ScenarioConfig& config,
                                                  std::uint64_t pf_seed, bool compute_kl,
                                                  SingleCorrectionClouds* clouds) {
  const DirGaussian dir_prior = cart_to_dir(setup.prior, config.run.sigma_scheme);
  const DirGaussian dir_post = static_correct_dir(dir_prior, setup.meas);
  const CartGaussian cart_post = static_correct_cart(setup.prior, setup.meas);

  SingleCorrectionTrial out;
  out.prior_range = setup.prior.position().norm();
  out.prior_sigma_max = std::sqrt(Eigen::SelfAdjointEigenSolver<MatrixXd>(setup.prior.cov).eigenvalues().maxCoeff());
  out.dckf_mahalanobis = mahalanobis(error_to_point(dir_post.nominal, setup.r_true).stacked(), dir_post.cov);
  out.ekf_mahalanobis = mahalanobis(setup.r_true - cart_post.position(), cart_post.cov);
  out.dckf_error = (setup.r_true - to_cartesian(dir_post.nominal)).norm();
  out.ekf_error = (setup.r_true - cart_post.position()).norm();
  if (!compute_kl) {
    return out;
  }

  const std::size_t samples = config.run.kl_samples;
  Rng rng(derive_seed(pf_seed, 0, 5));
  ParticleCloud cloud = make_cloud(setup.prior, config.run.pf_particles, derive_seed(pf_seed, 0, 6));
  cloud = pf_step(std::move(cloud), Vec3::Zero(), 0.0, 0.0, Measurement(setup.meas), rng);
  const MatrixXd pf = resample_systematic(cloud, samples, rng).states;
  const MatrixXd dckf = to_matrix(dir_to_cart_samples(dir_post, samples, derive_seed(pf_seed, 0, 7)));
  const MatrixXd ekf = to_matrix(sample_cart(cart_post, samples, derive_seed(pf_seed, 0, 8)));
  out.dckf_kl = kl_divergence_knn(dckf, pf, config.run.knn_k);
  out.ekf_kl = kl_divergence_knn(ekf, pf, config.run.knn_k);
  if (clouds != nullptr) {
    *clouds = {pf, dckf, ekf};
  }
  return out;
}

SingleCorrectionResult run_single_correction_study(const ScenarioConfig& config) {
  config.validate();
  SingleCorrectionResult result;
  result.config = config;
  const std::size_t n = config.run.trials;
  result.trials.resize(n);
  parallel_trials(n, resolve_threads(config), [&](std::size_t i) {
    const TrialSeeds seeds = trial_seeds(config.run.seed, i);
    const SingleCorrectionSetup setup = make_single_correction_setup(config, seeds.prior);
    result.trials[i] =
        run_single_correction_trial(setup, config, seeds.particles, true, i == 0 ? &result.example_clouds : nullptr);
  });
  return result;
}

double median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace dircoord
