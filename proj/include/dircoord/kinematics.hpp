#pragma once

#include <cstddef>
#include <utility>

#include "dircoord/dircoords.hpp"

namespace dircoord {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

constexpr double kMinRange = 1e-6;

struct DcState {
  double rho = 1.0;
  Rotation c;
  Vec3 v = Vec3::Zero();

  DirectionalCoord coord() const { return {rho, c}; }
  Vec3 position() const { return rho * c.matrix().col(0); }
};

struct CartState {
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

// Error-state model δẋ = A δx + L δa over [δρ, δφ, δv].
struct LinearizedDynamics {
  Mat6 a = Mat6::Zero();
  Mat63 l = Mat63::Zero();
};

// Counts range clamps at kMinRange; only ever increases.
struct ClampLog {
  std::size_t count = 0;
};

// S(ρ, C) = C·[e₁ | ρ·odot(e₁)], mapping [ρ̇; ω] to Cartesian velocity.
Mat3 s_matrix(double rho, const Rotation& c);
// Closed-form inverse diag(1, 1/ρ, 1/ρ)·[e₁ᵀ; odot(e₁)ᵀ]·Cᵀ. Throws ZeroRange.
Mat3 s_inverse(double rho, const Rotation& c);

struct DcRates {
  double rho_dot = 0.0;
  Vec2 omega = Vec2::Zero();
};

DcRates dc_rates(const DcState& state);

// Advances (ρ, C, v) with the acceleration held constant over dt, the same
// model as propagate_cart (r ← r + dt·v + dt²/2·a). dt is split into substeps
// no longer than 0.01·ρ/(|v| + |a|·dt), each integrated with a fourth-order
// Munthe-Kaas scheme on SO(3).
DcState propagate(const DcState& state, const Vec3& accel, double dt, ClampLog* clamps = nullptr);

// Single explicit Euler step of the directional kinematics, kept for
// comparison against propagate.
DcState propagate_euler(const DcState& state, const Vec3& accel, double dt);

LinearizedDynamics linearize(const DcState& state);

enum class Discretization { VanLoan, TruncatedSeries };

// Zero-order-hold discretization: returns (A_k, Q_k) for continuous A, L and
// acceleration PSD qc.
std::pair<Mat6, Mat6> discretize(const LinearizedDynamics& lin, const Mat3& qc, double dt,
                                 Discretization method = Discretization::VanLoan);

// Exact double-integrator step for piecewise-constant acceleration.
CartState propagate_cart(const CartState& state, const Vec3& accel, double dt);
LinearizedDynamics linearize_cart();

}  // namespace dircoord
