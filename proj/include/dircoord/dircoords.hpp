#pragma once

#include "dircoord/so3.hpp"

namespace dircoord {

// Position expressed as range and rotation: r = rho · C · e₁.
struct DirectionalCoord {
  double rho = 0.0;
  Rotation c;

  Vec3 direction() const { return c.matrix().col(0); }
};

// Error state between two directional coordinates: [δρ, δφ₁, δφ₂].
struct DirErrorVec {
  double d_rho = 0.0;
  Vec2 d_phi = Vec2::Zero();

  Vec3 stacked() const { return Vec3(d_rho, d_phi.x(), d_phi.y()); }
  static DirErrorVec from_stacked(const Vec3& v) { return {v.x(), v.tail<2>()}; }
};

Vec3 to_cartesian(const DirectionalCoord& dc);

// Total: r = 0 maps to (0, I); points on the negative x half-line map to a
// half turn about z.
DirectionalCoord from_cartesian(const Vec3& r);

// rho + d_rho, C·exp(d_phi^). Throws NegativeRange if the range goes negative.
DirectionalCoord perturb(const DirectionalCoord& nominal, const DirErrorVec& dx);

// (other.rho - nominal.rho, log_to_phi2(nominalᵀ·other)).
DirErrorVec error(const DirectionalCoord& nominal, const DirectionalCoord& other);

// Error of a Cartesian point against the nominal. The angular part is the
// twist-free rotation in the nominal frame that carries e₁ onto the point's
// direction, so it does not depend on how `nominal.c` is twisted about its
// own e₁ axis. Throws NearPiSingularity when the point lies (almost) opposite
// the nominal direction, OriginSingularity for r = 0.
DirErrorVec error_to_point(const DirectionalCoord& nominal, const Vec3& r);

// The directional coordinate of r whose rotation differs from `nominal.c`
// only by exp_phi2(error_to_point(nominal, r).d_phi).
DirectionalCoord aligned_from_cartesian(const DirectionalCoord& nominal, const Vec3& r);

}  // namespace dircoord
