#pragma once

#include <cstddef>
#include <optional>

#include "dircoord/belief.hpp"
#include "dircoord/kernels.hpp"
#include "dircoord/kinematics.hpp"
#include "dircoord/measurements.hpp"

namespace dircoord {

// K = P Hᵀ S⁻¹ with S = H P Hᵀ + M R Mᵀ.
struct KalmanGainStep {
  MatrixXd k;
  VectorXd z;
  MatrixXd s;
};

// Throws SingularInnovation when S has an eigenvalue at or below 1e-24 or its
// condition number exceeds 1e12.
KalmanGainStep kalman_gain(const MatrixXd& p, const LinearizedMeas& lin);

// (1 - K H) P (1 - K H)ᵀ + K M R Mᵀ Kᵀ, symmetrized. Valid for any K.
MatrixXd joseph_update(const MatrixXd& p, const MatrixXd& k, const LinearizedMeas& lin);

// Directional-coordinate Kalman filter over (ρ, C, v), error state [δρ, δφ, δv].
class Dckf {
 public:
  Dckf(const DcState& state, const Mat6& p, const Mat3& qc);

  // Initializes from a 6-D Cartesian prior converted with cart_to_dir.
  static Dckf from_cartesian_prior(const CartGaussian& prior, const Mat3& qc,
                                   SigmaScheme scheme = SigmaScheme::SphericalCubature);

  void predict(const Vec3& accel, double dt);
  KalmanGainStep correct(const LinearizedMeas& lin);
  KalmanGainStep correct(const RangeMeas& meas);
  KalmanGainStep correct(const AeMeas& meas);

  void set_ae_conversion(AeConversion c) { ae_conversion_ = c; }

  const DcState& state() const { return state_; }
  const Mat6& covariance() const { return p_; }
  std::size_t clamp_count() const { return clamps_.count; }

  // [ρᵗ - ρ̂, twist-free δφ, vᵗ - v̂]
  Vec6 error_to_truth(const Vec3& r_true, const Vec3& v_true) const;
  // Position/velocity covariance mapped to Cartesian to first order.
  Mat6 cartesian_covariance() const;

 private:
  DcState state_;
  Mat6 p_;
  Mat3 qc_;
  ClampLog clamps_;
  AeConversion ae_conversion_ = AeConversion::Linearized;
};

// Cartesian EKF over [r, v].
class CartEkf {
 public:
  CartEkf(const CartState& state, const Mat6& p, const Mat3& qc);
  static CartEkf from_cartesian_prior(const CartGaussian& prior, const Mat3& qc);

  void predict(const Vec3& accel, double dt);
  KalmanGainStep correct(const LinearizedMeas& lin);
  KalmanGainStep correct(const RangeMeas& meas);
  KalmanGainStep correct(const AeMeas& meas);

  const CartState& state() const { return state_; }
  const Mat6& covariance() const { return p_; }
  Vec6 error_to_truth(const Vec3& r_true, const Vec3& v_true) const;

 private:
  CartState state_;
  Mat6 p_;
  Mat3 qc_;
};

// Weighted particles; `states` is dim × N with dim 3 (position) or 6
// (position, velocity).
struct ParticleCloud {
  MatrixXd states;
  VectorXd weights;
  std::size_t degenerate_resets = 0;

  Eigen::Index size() const { return states.cols(); }
  double effective_sample_size() const { return 1.0 / weights.squaredNorm(); }
  VectorXd mean() const { return states * weights; }
  MatrixXd covariance() const;
};

ParticleCloud make_cloud(const CartGaussian& prior, std::size_t count, std::uint64_t seed);

// Systematic resampling to `count` equally weighted particles.
ParticleCloud resample_systematic(const ParticleCloud& pc, std::size_t count, Rng& rng);

// Bootstrap step: propagate 6-D particles with acceleration noise (skipped for
// 3-D clouds or dt = 0), weight by the measurement likelihood, resample when
// the effective sample size drops below N/2. If every likelihood underflows
// the weights are reset to uniform and degenerate_resets is incremented.
ParticleCloud pf_step(ParticleCloud pc, const Vec3& accel, double dt, double accel_std,
                      const std::optional<Measurement>& meas, Rng& rng,
                      kernels::Exec exec = kernels::Exec::Parallel);

// Single correction of a position-only prior, as used by the static study.
DirGaussian static_correct_dir(const DirGaussian& prior, const Measurement& meas);
CartGaussian static_correct_cart(const CartGaussian& prior, const Measurement& meas);

}  // namespace dircoord
