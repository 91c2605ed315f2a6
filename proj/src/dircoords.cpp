#include "dircoord/dircoords.hpp"

#include <cmath>
#include <numbers>

#include "dircoord/error.hpp"

namespace dircoord {

namespace {

constexpr double kNearPiAngle = std::numbers::pi - 1e-6;

// Twist-free rotation vector (0, φ₁, φ₂) taking e₁ onto the unit vector u.
Vec2 phi_towards(const Vec3& u) {
  const double s = std::hypot(u.y(), u.z());
  const double psi = std::atan2(s, u.x());
  if (s == 0.0) {
    return Vec2::Zero();
  }
  return (psi / s) * Vec2(-u.z(), u.y());
}

}  // namespace

Vec3 to_cartesian(const DirectionalCoord& dc) { return dc.rho * dc.direction(); }

DirectionalCoord from_cartesian(const Vec3& r) {
  const double rho = r.norm();
  if (rho == 0.0) {
    return {0.0, Rotation::identity()};
  }
  const double s = std::hypot(r.y(), r.z());
  if (s == 0.0) {
    if (r.x() > 0.0) {
      return {rho, Rotation::identity()};
    }
    return {rho, principal_rotation(Axis::Z, std::numbers::pi)};
  }
  // Axis (0, -r_z, r_y)/s, angle arccos(r_x/rho); atan2 keeps precision near 0 and pi.
  const double psi = std::atan2(s, r.x());
  const Vec3 axis(0.0, -r.z() / s, r.y() / s);
  return {rho, exp_so3(psi * axis)};
}

DirectionalCoord perturb(const DirectionalCoord& nominal, const DirErrorVec& dx) {
  const double rho = nominal.rho + dx.d_rho;
  if (rho < 0.0) {
    throw Error(ErrorKind::NegativeRange, "perturbation drives the range negative");
  }
  return {rho, nominal.c * exp_phi2(dx.d_phi)};
}

DirErrorVec error(const DirectionalCoord& nominal, const DirectionalCoord& other) {
  return {other.rho - nominal.rho, log_to_phi2(nominal.c.transpose() * other.c)};
}

DirErrorVec error_to_point(const DirectionalCoord& nominal, const Vec3& r) {
  const double rho = r.norm();
  if (rho == 0.0) {
    throw Error(ErrorKind::OriginSingularity, "point at the origin has no direction");
  }
  const Vec3 u = nominal.c.matrix().transpose() * (r / rho);
  if (std::atan2(std::hypot(u.y(), u.z()), u.x()) > kNearPiAngle) {
    throw Error(ErrorKind::NearPiSingularity, "point lies opposite the nominal direction");
  }
  return {rho - nominal.rho, phi_towards(u)};
}

DirectionalCoord aligned_from_cartesian(const DirectionalCoord& nominal, const Vec3& r) {
  const DirErrorVec e = error_to_point(nominal, r);
  return {r.norm(), nominal.c * exp_phi2(e.d_phi)};
}

}  // namespace dircoord
