#include "dircoord/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "dircoord/error.hpp"

namespace dircoord {

namespace {

const Mat32& odot_e1() {
  static const Mat32 m = odot(Vec3::UnitX());
  return m;
}

void require_positive_range(double rho) {
  if (!(rho > 0.0)) {
    throw Error(ErrorKind::ZeroRange, "directional kinematics are singular at rho <= 0");
  }
}

// Body-frame rates as a full rotation-vector rate [0, ω₁, ω₂].
Vec3 body_rate(double rho, const Rotation& c, const Vec3& v, double* rho_dot) {
  const Vec3 w = c.matrix().transpose() * v;
  *rho_dot = w.x();
  return Vec3(0.0, -w.z() / rho, w.y() / rho);
}

// Inverse right Jacobian of SO(3), truncated after the second-order term.
Vec3 dexp_inv(const Vec3& u, const Vec3& k) {
  const Vec3 uk = u.cross(k);
  return k + 0.5 * uk + (1.0 / 12.0) * u.cross(uk);
}

void clamp_range(double& rho, ClampLog* clamps) {
  if (rho < kMinRange) {
    rho = kMinRange;
    if (clamps != nullptr) {
      ++clamps->count;
    }
  }
}

}  // namespace

Mat3 s_matrix(double rho, const Rotation& c) {
  Mat3 local;
  local.col(0) = Vec3::UnitX();
  local.rightCols<2>() = rho * odot_e1();
  return c.matrix() * local;
}

Mat3 s_inverse(double rho, const Rotation& c) {
  require_positive_range(rho);
  Mat3 local;
  local.row(0) = Vec3::UnitX().transpose();
  local.bottomRows<2>() = odot_e1().transpose() / rho;
  return local * c.matrix().transpose();
}

DcRates dc_rates(const DcState& state) {
  require_positive_range(state.rho);
  double rho_dot = 0.0;
  const Vec3 omega = body_rate(state.rho, state.c, state.v, &rho_dot);
  return {rho_dot, omega.tail<2>()};
}

DcState propagate(const DcState& state, const Vec3& accel, double dt, ClampLog* clamps) {
  require_positive_range(state.rho);
  if (!(dt > 0.0)) {
    throw Error(ErrorKind::ConfigError, "propagation step must be positive");
  }
  const double speed = state.v.norm() + accel.norm() * dt;
  std::size_t substeps = 1;
  if (speed > 0.0) {
    const double max_step = 0.01 * state.rho / speed;
    substeps = static_cast<std::size_t>(std::clamp(std::ceil(dt / max_step), 1.0, 1e5));
  }
  const double h = dt / static_cast<double>(substeps);

  double rho = state.rho;
  Rotation c = state.c;
  Vec3 v = state.v;
  // RKMK4 on (rho, C) with v(t) integrated exactly inside each stage (constant accel).
  for (std::size_t i = 0; i < substeps; ++i) {
    const Vec3 v_mid = v + 0.5 * h * accel;
    const Vec3 v_end = v + h * accel;
    double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0;
    const Vec3 k1 = body_rate(rho, c, v, &r1);

    const Vec3 u2 = 0.5 * h * k1;
    const double rho2 = std::max(rho + 0.5 * h * r1, kMinRange);
    const Vec3 k2 = dexp_inv(u2, body_rate(rho2, c * exp_so3(u2), v_mid, &r2));

    const Vec3 u3 = 0.5 * h * k2;
    const double rho3 = std::max(rho + 0.5 * h * r2, kMinRange);
    const Vec3 k3 = dexp_inv(u3, body_rate(rho3, c * exp_so3(u3), v_mid, &r3));

    const Vec3 u4 = h * k3;
    const double rho4 = std::max(rho + h * r3, kMinRange);
    const Vec3 k4 = dexp_inv(u4, body_rate(rho4, c * exp_so3(u4), v_end, &r4));

    rho += h / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
    c = c * exp_so3(h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    v = v_end;
    clamp_range(rho, clamps);
  }
  return {rho, c.orthonormalized(), state.v + dt * accel};
}

DcState propagate_euler(const DcState& state, const Vec3& accel, double dt) {
  const DcRates rates = dc_rates(state);
  double rho = state.rho + dt * rates.rho_dot;
  clamp_range(rho, nullptr);
  return {rho, state.c * exp_phi2(dt * rates.omega), state.v + dt * accel};
}

LinearizedDynamics linearize(const DcState& state) {
  require_positive_range(state.rho);
  const double rho = state.rho;
  const Mat3& c = state.c.matrix();
  const Vec3 w = c.transpose() * state.v;
  const Mat32 odot_w = odot(w);

  LinearizedDynamics lin;
  lin.a.block<1, 2>(0, 1) = -odot_w.row(0);
  lin.a.block<1, 3>(0, 3) = c.col(0).transpose();
  lin.a.block<2, 1>(1, 0) = -(1.0 / (rho * rho)) * odot_e1().transpose() * w;
  lin.a.block<2, 2>(1, 1) = -(1.0 / rho) * odot_e1().transpose() * odot_w;
  lin.a.block<2, 3>(1, 3) = (1.0 / rho) * odot_e1().transpose() * c.transpose();
  lin.l.bottomRows<3>() = Mat3::Identity();
  return lin;
}

std::pair<Mat6, Mat6> discretize(const LinearizedDynamics& lin, const Mat3& qc, double dt,
                                 Discretization method) {
  if (!(dt > 0.0)) {
    throw Error(ErrorKind::ConfigError, "discretization step must be positive");
  }
  const Mat6 qd = lin.l * qc * lin.l.transpose();
  Mat6 ak;
  Mat6 qk;
  if (method == Discretization::VanLoan) {
    Eigen::Matrix<double, 12, 12> m = Eigen::Matrix<double, 12, 12>::Zero();
    m.topLeftCorner<6, 6>() = -lin.a * dt;
    m.topRightCorner<6, 6>() = qd * dt;
    m.bottomRightCorner<6, 6>() = lin.a.transpose() * dt;
    const Eigen::Matrix<double, 12, 12> e = m.exp();
    ak = e.bottomRightCorner<6, 6>().transpose();
    qk = ak * e.topRightCorner<6, 6>();
  } else {
    ak = Mat6::Identity() + lin.a * dt + 0.5 * lin.a * lin.a * dt * dt;
    qk = qd * dt + 0.5 * (lin.a * qd + qd * lin.a.transpose()) * dt * dt;
  }
  return {ak, 0.5 * (qk + qk.transpose())};
}

CartState propagate_cart(const CartState& state, const Vec3& accel, double dt) {
  return {state.r + dt * state.v + 0.5 * dt * dt * accel, state.v + dt * accel};
}

LinearizedDynamics linearize_cart() {
  LinearizedDynamics lin;
  lin.a.block<3, 3>(0, 3) = Mat3::Identity();
  lin.l.bottomRows<3>() = Mat3::Identity();
  return lin;
}

}  // namespace dircoord
