#pragma once

#include <utility>
#include <variant>

#include "dircoord/dircoords.hpp"
#include "dircoord/linalg.hpp"
#include "dircoord/random.hpp"

namespace dircoord {

struct RangeMeas {
  double y = 0.0;
  double var = 0.0;
};

// Azimuth/elevation pair. Simulated elevations carry unclipped Gaussian noise
// and may leave (-π/2, π/2); ae_to_direction is defined for any pair.
struct AeMeas {
  double alpha = 0.0;
  double epsilon = 0.0;
  Mat2 cov = Mat2::Zero();
};

struct DirVecMeas {
  Vec3 y = Vec3::UnitX();
  Mat3 r = Mat3::Identity();
};

using Measurement = std::variant<RangeMeas, AeMeas, DirVecMeas>;

// Innovation z, Jacobian H (rows × error-state dim), noise Jacobian M and
// noise covariance R, so that z ≈ H δx + M ν.
struct LinearizedMeas {
  VectorXd z;
  MatrixXd h;
  MatrixXd m;
  MatrixXd r;
};

// [cos ε cos α, cos ε sin α, sin ε], i.e. C_z(α)ᵀ C_y(-ε)ᵀ e₁ with C_axis the
// passive principal DCM (transpose of principal_rotation).
Vec3 ae_to_direction(double alpha, double epsilon);

// Throws GimbalPole when |g₃| >= 1 - 1e-12.
std::pair<double, double> direction_to_ae(const Vec3& g);

// ∂ae_to_direction/∂(α, ε).
Mat32 ae_jacobian(double alpha, double epsilon);

Mat3 ae_cov_to_R(double alpha, double epsilon, const Mat2& cov);

// Noise mapped through the angle Jacobian at the measured angles.
DirVecMeas ae_to_dirvec(const AeMeas& meas);
enum class AeConversion {
  Linearized,  // R = J·cov·Jᵀ
  Debiased,    // exact first two moments of the noisy unit vector
};

// Conversion about the angles of `linearize_at` (the predicted direction). At
// large angle noise the measured angles often sit near a pole, where the
// mapped noise collapses in the azimuth direction.
// Debiased: the measured vector is shifted by the expected bias
// E[d(α+n_α, ε+n_ε)] - d(α, ε) and R is the exact covariance, both at the
// predicted angles. Azimuth noise shrinks the horizontal components by
// exp(-σ²/2), which tilts the measured vector toward the pole.
DirVecMeas ae_to_dirvec(const AeMeas& meas, const Vec3& linearize_at,
                        AeConversion conversion = AeConversion::Linearized);

// Mean and covariance of ae_to_direction(α + n_α, ε + n_ε) for independent
// zero-mean Gaussian n_α, n_ε with variances cov(0,0), cov(1,1) (off-diagonal
// terms are ignored).
void ae_direction_moments(double alpha, double epsilon, const Mat2& cov, Vec3& mean, Mat3& covariance);

// Wraps to (-π, π].
double wrap_angle(double a);

// Directional-coordinate models; state_dim is 3 (position) or 6 (with velocity).
LinearizedMeas range_innovation_dir(const RangeMeas& meas, const DirectionalCoord& nominal, int state_dim);
LinearizedMeas ae_innovation_dir(const DirVecMeas& meas, const DirectionalCoord& nominal, int state_dim);

// Cartesian models about the position estimate r_hat.
LinearizedMeas range_innovation_cart(const RangeMeas& meas, const Vec3& r_hat, int state_dim);
LinearizedMeas ae_innovation_cart(const AeMeas& meas, const Vec3& r_hat, int state_dim);

RangeMeas simulate_range(const Vec3& r_true, double sigma, Rng& rng);
AeMeas simulate_ae(const Vec3& r_true, double sigma_ae, Rng& rng);

}  // namespace dircoord
