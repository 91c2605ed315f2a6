#pragma once

#include <Eigen/Dense>

namespace dircoord {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

// Element of SO(3). Construction from a raw matrix checks orthonormality.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  // Throws Error(NotInImage) if m is not a rotation within tol.
  static Rotation from_matrix(const Mat3& m, double tol = 1e-9);
  static Rotation unchecked(const Mat3& m) { return Rotation(m); }
  static Rotation identity() { return Rotation(); }

  const Mat3& matrix() const { return m_; }
  Rotation transpose() const { return Rotation(m_.transpose()); }
  Rotation operator*(const Rotation& rhs) const { return Rotation(m_ * rhs.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  // Closest rotation in the Frobenius sense (polar factor of m).
  Rotation orthonormalized() const;
  // max(|mᵀm - I|_F, |det m - 1|)
  double orthonormality_error() const;

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

enum class Axis { X, Y, Z };

struct AxisAngle {
  Vec3 axis = Vec3::UnitX();
  double angle = 0.0;
};

Mat3 cross_matrix(const Vec3& v);

// Local two-parameter tangent of the directional coordinates: wedge2(φ) is
// cross_matrix([0, φ₁, φ₂]).
Mat3 wedge2(const Vec2& phi);
Vec2 vee2(const Mat3& m, double tol = 1e-9);

// The 3×2 matrix satisfying wedge2(φ)·a = odot(a)·φ.
Mat32 odot(const Vec3& a);

Rotation exp_so3(const Vec3& theta);
Vec3 log_so3(const Rotation& c);
Vec2 log_to_phi2(const Rotation& c_rel);

inline Rotation exp_phi2(const Vec2& phi) { return exp_so3(Vec3(0.0, phi.x(), phi.y())); }

AxisAngle to_axis_angle(const Rotation& c);

// Active rotation by `angle` about the basis axis, i.e. exp_so3(angle·e_axis).
Rotation principal_rotation(Axis axis, double angle);

}  // namespace dircoord
