#include "dircoord/measurements.hpp"

#include <cmath>
#include <numbers>

#include "dircoord/error.hpp"

namespace dircoord {

namespace {

constexpr double kOriginTol = 1e-6;
constexpr double kPoleTol = 1e-12;
constexpr double kRegularization = 1e-12;

Eigen::Matrix<double, 2, 3> projection_e() {
  Eigen::Matrix<double, 2, 3> e;
  e << 0.0, 1.0, 0.0,
       0.0, 0.0, 1.0;
  return e;
}

void require_off_origin(const Vec3& r) {
  if (!(r.norm() > kOriginTol)) {
    throw Error(ErrorKind::OriginSingularity, "position estimate at the origin");
  }
}

}  // namespace

Vec3 ae_to_direction(double alpha, double epsilon) {
  const double ce = std::cos(epsilon);
  return Vec3(ce * std::cos(alpha), ce * std::sin(alpha), std::sin(epsilon));
}

std::pair<double, double> direction_to_ae(const Vec3& g) {
  if (std::abs(g.z()) >= 1.0 - kPoleTol) {
    throw Error(ErrorKind::GimbalPole, "azimuth undefined at elevation +-pi/2");
  }
  return {std::atan2(g.y(), g.x()), std::asin(g.z())};
}

Mat32 ae_jacobian(double alpha, double epsilon) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double ce = std::cos(epsilon), se = std::sin(epsilon);
  Mat32 j;
  j << -ce * sa, -se * ca,
       ce * ca, -se * sa,
       0.0, ce;
  return j;
}

Mat3 ae_cov_to_R(double alpha, double epsilon, const Mat2& cov) {
  const Mat32 j = ae_jacobian(alpha, epsilon);
  const Mat3 r = j * cov * j.transpose() + kRegularization * Mat3::Identity();
  return 0.5 * (r + r.transpose());
}

DirVecMeas ae_to_dirvec(const AeMeas& meas) {
  return {ae_to_direction(meas.alpha, meas.epsilon), ae_cov_to_R(meas.alpha, meas.epsilon, meas.cov)};
}

void ae_direction_moments(double alpha, double epsilon, const Mat2& cov, Vec3& mean, Mat3& covariance) {
  const double va = cov(0, 0), ve = cov(1, 1);
  // E[cos(x + n)] = cos x·e^{-v/2}, E[cos²(x + n)] = (1 + cos 2x·e^{-2v})/2, ...
  const double ka = std::exp(-0.5 * va), ke = std::exp(-0.5 * ve);
  const double ka2 = std::exp(-2.0 * va), ke2 = std::exp(-2.0 * ve);
  const double ca = std::cos(alpha) * ka, sa = std::sin(alpha) * ka;
  const double ce = std::cos(epsilon) * ke, se = std::sin(epsilon) * ke;
  mean << ce * ca, ce * sa, se;

  const double cc_e = 0.5 * (1.0 + ke2 * std::cos(2.0 * epsilon));
  const double ss_e = 0.5 * (1.0 - ke2 * std::cos(2.0 * epsilon));
  const double sc_e = 0.5 * ke2 * std::sin(2.0 * epsilon);
  const double cc_a = 0.5 * (1.0 + ka2 * std::cos(2.0 * alpha));
  const double ss_a = 0.5 * (1.0 - ka2 * std::cos(2.0 * alpha));
  const double sc_a = 0.5 * ka2 * std::sin(2.0 * alpha);
  Mat3 second;
  second << cc_e * cc_a, cc_e * sc_a, sc_e * ca,
            cc_e * sc_a, cc_e * ss_a, sc_e * sa,
            sc_e * ca,   sc_e * sa,   ss_e;
  covariance = second - mean * mean.transpose();
  covariance = 0.5 * (covariance + covariance.transpose()).eval();
}

DirVecMeas ae_to_dirvec(const AeMeas& meas, const Vec3& linearize_at, AeConversion conversion) {
  const double alpha = std::atan2(linearize_at.y(), linearize_at.x());
  const double epsilon = std::atan2(linearize_at.z(), std::hypot(linearize_at.x(), linearize_at.y()));
  const Vec3 y = ae_to_direction(meas.alpha, meas.epsilon);
  if (conversion == AeConversion::Linearized) {
    return {y, ae_cov_to_R(alpha, epsilon, meas.cov)};
  }
  Vec3 mean;
  Mat3 cov;
  ae_direction_moments(alpha, epsilon, meas.cov, mean, cov);
  return {y - (mean - ae_to_direction(alpha, epsilon)), cov + kRegularization * Mat3::Identity()};
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) {
    a += 2.0 * std::numbers::pi;
  }
  return a;
}

LinearizedMeas range_innovation_dir(const RangeMeas& meas, const DirectionalCoord& nominal, int state_dim) {
  LinearizedMeas lin;
  lin.z = VectorXd::Constant(1, meas.y - nominal.rho);
  lin.h = MatrixXd::Zero(1, state_dim);
  lin.h(0, 0) = 1.0;
  lin.m = MatrixXd::Identity(1, 1);
  lin.r = MatrixXd::Constant(1, 1, meas.var);
  return lin;
}

LinearizedMeas ae_innovation_dir(const DirVecMeas& meas, const DirectionalCoord& nominal, int state_dim) {
  const Eigen::Matrix<double, 2, 3> e = projection_e();
  const Mat3 ct = nominal.c.matrix().transpose();
  LinearizedMeas lin;
  lin.z = e * ct * (meas.y - nominal.direction());
  lin.h = MatrixXd::Zero(2, state_dim);
  lin.h.block<2, 2>(0, 1) = e * odot(Vec3::UnitX());
  lin.m = e * ct;
  lin.r = meas.r;
  return lin;
}

LinearizedMeas range_innovation_cart(const RangeMeas& meas, const Vec3& r_hat, int state_dim) {
  require_off_origin(r_hat);
  const double range = r_hat.norm();
  LinearizedMeas lin;
  lin.z = VectorXd::Constant(1, meas.y - range);
  lin.h = MatrixXd::Zero(1, state_dim);
  lin.h.block<1, 3>(0, 0) = r_hat.transpose() / range;
  lin.m = MatrixXd::Identity(1, 1);
  lin.r = MatrixXd::Constant(1, 1, meas.var);
  return lin;
}

LinearizedMeas ae_innovation_cart(const AeMeas& meas, const Vec3& r_hat, int state_dim) {
  require_off_origin(r_hat);
  const double rho = r_hat.norm();
  const auto [alpha_hat, eps_hat] = direction_to_ae(r_hat / rho);
  const double x = r_hat.x(), y = r_hat.y(), z = r_hat.z();
  const double rxy2 = x * x + y * y;
  const double rxy = std::sqrt(rxy2);
  const double rho2 = rho * rho;

  LinearizedMeas lin;
  lin.z = Eigen::Vector2d(wrap_angle(meas.alpha - alpha_hat), wrap_angle(meas.epsilon - eps_hat));
  lin.h = MatrixXd::Zero(2, state_dim);
  lin.h.block<1, 3>(0, 0) << -y / rxy2, x / rxy2, 0.0;
  lin.h.block<1, 3>(1, 0) << -z * x / (rho2 * rxy), -z * y / (rho2 * rxy), rxy / rho2;
  lin.m = MatrixXd::Identity(2, 2);
  lin.r = meas.cov;
  return lin;
}

RangeMeas simulate_range(const Vec3& r_true, double sigma, Rng& rng) {
  return {r_true.norm() + sigma * standard_normal(rng), sigma * sigma};
}

AeMeas simulate_ae(const Vec3& r_true, double sigma_ae, Rng& rng) {
  const auto [alpha, epsilon] = direction_to_ae(r_true.normalized());
  const double na = standard_normal(rng);
  const double ne = standard_normal(rng);
  AeMeas m;
  m.alpha = wrap_angle(alpha + sigma_ae * na);
  m.epsilon = epsilon + sigma_ae * ne;
  m.cov = (sigma_ae * sigma_ae) * Mat2::Identity();
  return m;
}

}  // namespace dircoord
