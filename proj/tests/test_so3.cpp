#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dircoord/error.hpp"
#include "dircoord/random.hpp"
#include "dircoord/so3.hpp"

using namespace dircoord;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 random_vec(Rng& rng, double scale) {
  return Vec3(uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale));
}

}  // namespace

TEST(CrossMatrix, ZAxisGenerator) {
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  EXPECT_TRUE(cross_matrix(Vec3::UnitZ()).isApprox(expected));
  EXPECT_TRUE(cross_matrix(Vec3::Zero()).isZero());
}

TEST(CrossMatrix, MatchesCrossProduct) {
  const Vec3 v(1, 2, 3), w(4, 5, 6);
  EXPECT_TRUE((cross_matrix(v) * w).isApprox(Vec3(-3, 6, -3)));
  const Mat3 m = cross_matrix(v);
  EXPECT_TRUE((m.transpose() + m).isZero());
}

TEST(Wedge2, DefinitionMatrix) {
  Mat3 expected;
  expected << 0, -2, 1, 2, 0, 0, -1, 0, 0;
  EXPECT_EQ(wedge2(Vec2(1, 2)), expected);
  EXPECT_TRUE(wedge2(Vec2::Zero()).isZero());
}

TEST(Wedge2, EqualsCrossMatrixOfPaddedVector) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec2 phi(uniform(rng, -2, 2), uniform(rng, -2, 2));
    EXPECT_EQ(wedge2(phi), cross_matrix(Vec3(0, phi.x(), phi.y())));
  }
}

TEST(Vee2, RoundTripAndZero) {
  Mat3 m;
  m << 0, -2, 1, 2, 0, 0, -1, 0, 0;
  EXPECT_EQ(vee2(m), Vec2(1, 2));
  EXPECT_EQ(vee2(wedge2(Vec2(1, 2))), Vec2(1, 2));
  EXPECT_EQ(vee2(Mat3::Zero()), Vec2::Zero());
}

TEST(Vee2, RejectsOutsideImage) {
  Mat3 twist = cross_matrix(Vec3(0.5, 1, 2));
  try {
    vee2(twist);
    FAIL() << "expected NotInImage";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotInImage);
  }
  Mat3 nonskew = wedge2(Vec2(1, 2));
  nonskew(0, 1) += 1e-3;
  EXPECT_THROW(vee2(nonskew), Error);
}

TEST(Odot, MatchesDefinition) {
  Mat32 expected;
  expected << 3, -2, 0, 1, -1, 0;
  EXPECT_EQ(odot(Vec3(1, 2, 3)), expected);
  EXPECT_TRUE(odot(Vec3::Zero()).isZero());
}

TEST(Odot, WedgeIdentity) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = random_vec(rng, 10);
    const Vec2 phi(uniform(rng, -3, 3), uniform(rng, -3, 3));
    EXPECT_LT((wedge2(phi) * a - odot(a) * phi).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(WedgeIdentities, TransposeLinearityAndProductExtraction) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Vec2 b(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const Vec2 c(uniform(rng, -2, 2), uniform(rng, -2, 2));
    EXPECT_EQ(wedge2(b).transpose(), Mat3(-wedge2(b)));
    EXPECT_TRUE(wedge2(b + c).isApprox(wedge2(b) + wedge2(c)));
    const Mat3 prod = wedge2(b) * wedge2(c);
    const Mat3 skew = 0.5 * (prod - prod.transpose());
    EXPECT_NEAR(skew(0, 2), 0.0, 1e-14);
    EXPECT_NEAR(skew(1, 0), 0.0, 1e-14);
  }
}

TEST(ExpSo3, ZeroAndQuarterTurn) {
  EXPECT_EQ(exp_so3(Vec3::Zero()).matrix(), Mat3::Identity());
  const Rotation r = exp_so3(Vec3(0, 0, kPi / 2));
  EXPECT_LT((r * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
}

TEST(ExpSo3, InverseAndOrthonormality) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 th = random_vec(rng, 3);
    const Mat3 prod = exp_so3(th).matrix() * exp_so3(-th).matrix();
    EXPECT_LT((prod - Mat3::Identity()).norm(), 1e-12);
    EXPECT_LT(exp_so3(th).orthonormality_error(), 1e-12);
  }
}

TEST(ExpSo3, SmallAngleBranchIsContinuous) {
  const Vec3 axis = Vec3(1, -2, 0.5).normalized();
  const Mat3 below = exp_so3(0.99e-7 * axis).matrix();
  const Mat3 above = exp_so3(1.01e-7 * axis).matrix();
  EXPECT_LT((below - above).norm(), 1e-8);
}

TEST(LogSo3, Identity) { EXPECT_TRUE(log_so3(Rotation::identity()).isZero()); }

TEST(LogSo3, RoundTrip) {
  EXPECT_LT((log_so3(exp_so3(Vec3(0.1, -0.2, 0.3))) - Vec3(0.1, -0.2, 0.3)).norm(), 1e-10);
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    Vec3 th = random_vec(rng, 2);
    if (th.norm() >= 3.0) continue;
    EXPECT_LT((log_so3(exp_so3(th)) - th).norm(), 1e-9);
  }
}

TEST(LogSo3, NearPiThrows) {
  try {
    log_so3(exp_so3(Vec3(0, 0, kPi)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NearPiSingularity);
  }
  EXPECT_NO_THROW(log_so3(exp_so3(Vec3(0, 0, kPi - 1e-2))));
}

TEST(LogToPhi2, DropsTwist) {
  EXPECT_TRUE(log_to_phi2(Rotation::identity()).isZero());
  EXPECT_LT((log_to_phi2(exp_phi2(Vec2(0.3, -0.1))) - Vec2(0.3, -0.1)).norm(), 1e-10);
  EXPECT_LT(log_to_phi2(exp_so3(Vec3(0.5, 0, 0))).norm(), 1e-15);
}

TEST(Rotation, FromMatrixChecks) {
  EXPECT_NO_THROW(Rotation::from_matrix(exp_so3(Vec3(0.2, 0.3, 0.4)).matrix()));
  Mat3 bad = Mat3::Identity();
  bad(0, 0) = 1.01;
  EXPECT_THROW(Rotation::from_matrix(bad), Error);
  Mat3 reflection = Mat3::Identity();
  reflection(2, 2) = -1;
  EXPECT_THROW(Rotation::from_matrix(reflection), Error);
}

TEST(Rotation, OrthonormalizationIdempotent) {
  Mat3 m = exp_so3(Vec3(0.4, -1.0, 0.2)).matrix();
  m += 1e-6 * Mat3::Ones();
  const Rotation once = Rotation::unchecked(m).orthonormalized();
  const Rotation twice = once.orthonormalized();
  EXPECT_LT(once.orthonormality_error(), 1e-12);
  EXPECT_LT((once.matrix() - twice.matrix()).norm(), 1e-12);
}

TEST(Rotation, LongCompositionWithPeriodicCleanupStaysOrthonormal) {
  Rng rng(17);
  Rotation c;
  for (int i = 1; i <= 1000000; ++i) {
    c = c * exp_so3(random_vec(rng, 0.1));
    if (i % 1000 == 0) c = c.orthonormalized();
  }
  EXPECT_LT(c.orthonormality_error(), 1e-9);
}

TEST(PrincipalRotation, MatchesExponential) {
  EXPECT_EQ(principal_rotation(Axis::Z, 0.0).matrix(), Mat3::Identity());
  EXPECT_TRUE(principal_rotation(Axis::Z, kPi / 2).matrix().isApprox(exp_so3(Vec3(0, 0, kPi / 2)).matrix()));
  const Mat3 p = principal_rotation(Axis::Y, 0.7).matrix() * principal_rotation(Axis::Y, -0.7).matrix();
  EXPECT_LT((p - Mat3::Identity()).norm(), 1e-15);
}

TEST(AxisAngle, RecoversAxisAndAngle) {
  const Vec3 axis = Vec3(1, 2, -2).normalized();
  const AxisAngle aa = to_axis_angle(exp_so3(1.2 * axis));
  EXPECT_NEAR(aa.angle, 1.2, 1e-12);
  EXPECT_LT((aa.axis - axis).norm(), 1e-12);
  EXPECT_NEAR(aa.axis.norm(), 1.0, 1e-12);
}
