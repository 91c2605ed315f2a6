#include "dircoord/so3.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "dircoord/error.hpp"

namespace dircoord {

namespace {

constexpr double kSmallAngle = 1e-7;
constexpr double kNearPiTrace = 1e-6;

Vec3 vee3(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotInImage: return "NotInImage";
    case ErrorKind::NearPiSingularity: return "NearPiSingularity";
    case ErrorKind::NegativeRange: return "NegativeRange";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::MeanAtOrigin: return "MeanAtOrigin";
    case ErrorKind::GimbalPole: return "GimbalPole";
    case ErrorKind::OriginSingularity: return "OriginSingularity";
    case ErrorKind::ZeroRange: return "ZeroRange";
    case ErrorKind::SingularInnovation: return "SingularInnovation";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::DuplicatePoints: return "DuplicatePoints";
    case ErrorKind::MisalignedTimestamps: return "MisalignedTimestamps";
    case ErrorKind::RejectionLimit: return "RejectionLimit";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Rotation Rotation::from_matrix(const Mat3& m, double tol) {
  Rotation r(m);
  if (!m.allFinite() || r.orthonormality_error() > tol) {
    throw Error(ErrorKind::NotInImage, "matrix is not in SO(3)");
  }
  return r;
}

Rotation Rotation::orthonormalized() const {
  Eigen::JacobiSVD<Mat3> svd(m_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(2) = -u.col(2);
  }
  return Rotation(u * v.transpose());
}

double Rotation::orthonormality_error() const {
  const double ortho = (m_.transpose() * m_ - Mat3::Identity()).norm();
  return std::max(ortho, std::abs(m_.determinant() - 1.0));
}

Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 wedge2(const Vec2& phi) { return cross_matrix(Vec3(0.0, phi.x(), phi.y())); }

Vec2 vee2(const Mat3& m, double tol) {
  const double skew_residual = (m + m.transpose()).cwiseAbs().maxCoeff();
  if (std::abs(m(2, 1)) > tol || skew_residual > tol) {
    throw Error(ErrorKind::NotInImage, "matrix is not in the image of wedge2");
  }
  return Vec2(m(0, 2), m(1, 0));
}

Mat32 odot(const Vec3& a) {
  Mat32 m;
  m << a.z(), -a.y(),
       0.0, a.x(),
       -a.x(), 0.0;
  return m;
}

Rotation exp_so3(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 k = cross_matrix(theta);
  if (angle < kSmallAngle) {
    return Rotation::unchecked(Mat3::Identity() + k + 0.5 * k * k);
  }
  const double a = std::sin(angle) / angle;
  const double b = (1.0 - std::cos(angle)) / (angle * angle);
  return Rotation::unchecked(Mat3::Identity() + a * k + b * k * k);
}

Vec3 log_so3(const Rotation& c) {
  const Mat3& m = c.matrix();
  const double tr = m.trace();
  if (tr <= -1.0 + kNearPiTrace) {
    throw Error(ErrorKind::NearPiSingularity, "rotation angle too close to pi for a unique logarithm");
  }
  const Vec3 s = 0.5 * vee3(m - m.transpose());  // sin(angle)·axis
  const double sin_angle = s.norm();
  const double angle = std::atan2(sin_angle, 0.5 * (tr - 1.0));
  if (angle < kSmallAngle) {
    return s;
  }
  return (angle / sin_angle) * s;
}

Vec2 log_to_phi2(const Rotation& c_rel) {
  const Vec3 theta = log_so3(c_rel);
  return Vec2(theta.y(), theta.z());
}

AxisAngle to_axis_angle(const Rotation& c) {
  const Vec3 theta = log_so3(c);
  const double angle = theta.norm();
  if (angle < kSmallAngle) {
    return {Vec3::UnitX(), 0.0};
  }
  return {theta / angle, angle};
}

Rotation principal_rotation(Axis axis, double angle) {
  Vec3 e = Vec3::Zero();
  e[static_cast<int>(axis)] = 1.0;
  return exp_so3(angle * e);
}

}  // namespace dircoord
