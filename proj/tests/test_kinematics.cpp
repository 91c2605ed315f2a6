#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "dircoord/error.hpp"
#include "dircoord/kinematics.hpp"
#include "support/oracles.hpp"

using namespace dircoord;

TEST(SMatrix, IdentityExample) {
  Mat3 s, si;
  s << 1, 0, 0, 0, 0, 1, 0, -1, 0;
  si << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_EQ(s_matrix(1.0, Rotation::identity()), s);
  EXPECT_EQ(s_inverse(1.0, Rotation::identity()), si);
}

TEST(SMatrix, InverseAndScaling) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const DcState st = oracle::random_state(rng);
    EXPECT_LT((s_matrix(st.rho, st.c) * s_inverse(st.rho, st.c) - Mat3::Identity()).norm(), 1e-12);
    const Mat3 a = s_inverse(st.rho, st.c), b = s_inverse(2 * st.rho, st.c);
    EXPECT_LT((a.row(0) - b.row(0)).norm(), 1e-15);
    EXPECT_LT((a.bottomRows<2>() - 2.0 * b.bottomRows<2>()).norm(), 1e-12);
  }
  try {
    s_inverse(0.0, Rotation::identity());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroRange);
  }
}

TEST(DcRates, Examples) {
  const DcRates radial = dc_rates({2.0, Rotation::identity(), Vec3(1, 0, 0)});
  EXPECT_EQ(radial.rho_dot, 1.0);
  EXPECT_EQ(radial.omega, Vec2::Zero());
  const DcRates tangential = dc_rates({2.0, Rotation::identity(), Vec3(0, 1, 0)});
  EXPECT_EQ(tangential.rho_dot, 0.0);
  EXPECT_LT((tangential.omega - Vec2(0, 0.5)).norm(), 1e-15);
}

TEST(DcRates, ReproducesCartesianVelocity) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const DcState st = oracle::random_state(rng);
    const DcRates r = dc_rates(st);
    EXPECT_LT((s_matrix(st.rho, st.c) * Vec3(r.rho_dot, r.omega.x(), r.omega.y()) - st.v).norm(), 1e-12);
  }
}

TEST(Propagate, StationaryAndRadial) {
  const DcState still{3.0, exp_so3(Vec3(0.1, 0.2, 0.3)), Vec3::Zero()};
  const DcState out = propagate(still, Vec3::Zero(), 0.5);
  EXPECT_EQ(out.rho, 3.0);
  EXPECT_LT((out.c.matrix() - still.c.matrix()).norm(), 1e-15);

  DcState s{2.0, Rotation::identity(), Vec3(1, 0, 0)};
  for (int i = 0; i < 100; ++i) s = propagate(s, Vec3::Zero(), 0.01);
  EXPECT_NEAR(s.rho, 3.0, 1e-12);
  EXPECT_LT((s.position() - Vec3(3, 0, 0)).norm(), 1e-6);
}

TEST(Propagate, TangentialStepChangesRangeAtSecondOrder) {
  const DcState s{5.0, Rotation::identity(), Vec3(0, 2, 0)};
  const double dt = 1e-3;
  const DcState out = propagate(s, Vec3::Zero(), dt);
  EXPECT_NEAR(out.rho, std::hypot(5.0, 2.0 * dt), 1e-14);
  EXPECT_LT(out.rho - 5.0, 1e-6);
}

TEST(Propagate, MatchesCartesianIntegration) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    DcState s = oracle::random_state(rng, 1.0, 20.0);
    Vec3 r = s.position(), v = s.v;
    const Vec3 a(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    for (int k = 0; k < 1000; ++k) {
      s = propagate(s, a, 1e-3);
      r += 1e-3 * v + 0.5e-6 * a;
      v += 1e-3 * a;
    }
    EXPECT_LT((s.position() - r).norm(), 1e-6 * std::max(1.0, r.norm()));
    EXPECT_LT((s.v - v).norm(), 1e-12);
  }
}

TEST(Propagate, RejectsNonPositiveStep) {
  EXPECT_THROW(propagate({1.0, Rotation::identity(), Vec3::Zero()}, Vec3::Zero(), 0.0), Error);
}

TEST(Propagate, ClampsAtTheOrigin) {
  ClampLog log;
  const DcState out = propagate({1.0, Rotation::identity(), Vec3(-10, 0, 0)}, Vec3::Zero(), 0.2, &log);
  EXPECT_GE(out.rho, kMinRange);
  EXPECT_GT(log.count, 0u);
}

TEST(Linearize, Examples) {
  const LinearizedDynamics zero_v = linearize({4.0, exp_so3(Vec3(0.2, 0.4, 0.6)), Vec3::Zero()});
  EXPECT_TRUE(zero_v.a.leftCols<3>().isZero());
  EXPECT_FALSE(zero_v.a.rightCols<3>().isZero());
  EXPECT_TRUE(zero_v.a.bottomRows<3>().isZero());
  EXPECT_EQ(zero_v.l.bottomRows<3>(), Mat3::Identity());
  EXPECT_TRUE(zero_v.l.topRows<3>().isZero());

  const LinearizedDynamics lin = linearize({2.0, Rotation::identity(), Vec3(1, 0, 0)});
  Vec6 row;
  row << 0, 0, 0, 1, 0, 0;
  EXPECT_LT((lin.a.row(0).transpose() - row).norm(), 1e-15);
}

TEST(Linearize, MatchesFiniteDifferencesOfTheFlow) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const DcState s = oracle::random_state(rng);
    const Mat6 a = linearize(s).a;
    const Mat6 fd = oracle::fd_a_matrix(s);
    EXPECT_LT((a - fd).norm() / a.norm(), 1e-4) << "rho " << s.rho;
  }
}

TEST(Discretize, ConstantSystemClosedForm) {
  LinearizedDynamics lin;
  lin.l.bottomRows<3>() = Mat3::Identity();
  const double q = 0.3, dt = 0.05;
  const auto [ak, qk] = discretize(lin, q * Mat3::Identity(), dt);
  EXPECT_LT((ak - Mat6::Identity()).norm(), 1e-15);
  Mat6 expected = Mat6::Zero();
  expected.bottomRightCorner<3, 3>() = q * dt * Mat3::Identity();
  EXPECT_LT((qk - expected).norm(), 1e-15);
}

TEST(Discretize, DoubleIntegratorClosedForm) {
  const double q = 0.7, dt = 0.1;
  const auto [ak, qk] = discretize(linearize_cart(), q * Mat3::Identity(), dt);
  Mat6 a = Mat6::Identity();
  a.topRightCorner<3, 3>() = dt * Mat3::Identity();
  EXPECT_LT((ak - a).norm(), 1e-14);
  EXPECT_NEAR(qk(0, 0), q * dt * dt * dt / 3, 1e-15);
  EXPECT_NEAR(qk(0, 3), q * dt * dt / 2, 1e-15);
  EXPECT_NEAR(qk(3, 3), q * dt, 1e-15);
}

TEST(Discretize, SmallStepLimitAndPsd) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const LinearizedDynamics lin = linearize(oracle::random_state(rng));
    const auto [ak, qk] = discretize(lin, 0.1 * Mat3::Identity(), 0.01);
    EXPECT_LT((qk - qk.transpose()).norm(), 1e-15);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat6>(qk).eigenvalues().minCoeff(), -1e-15);
    const auto [ak_series, qk_series] = discretize(lin, 0.1 * Mat3::Identity(), 0.01, Discretization::TruncatedSeries);
    // Series truncation error is third order in A·dt.
    const double x = (lin.a * 0.01).norm();
    EXPECT_LT((ak - ak_series).norm(), x * x * x);
    EXPECT_LT((qk - qk_series).norm(), 0.1 * 0.01 * x * x);
    const auto [tiny, unused] = discretize(lin, Mat3::Identity(), 1e-9);
    EXPECT_LT((tiny - Mat6::Identity()).norm(), 1e-7);
  }
}

TEST(PropagateCart, UniformMotion) {
  const CartState s{Vec3(1, 2, 3), Vec3(0.5, -1, 2)};
  const CartState out = propagate_cart(s, Vec3::Zero(), 2.0);
  EXPECT_EQ(out.r, Vec3(2, 0, 7));
  EXPECT_EQ(out.v, s.v);
  const CartState acc = propagate_cart(s, Vec3(0, 0, -2), 2.0);
  EXPECT_LT((acc.r - Vec3(2, 0, 3)).norm(), 1e-15);
  EXPECT_LT((acc.v - Vec3(0.5, -1, -2)).norm(), 1e-15);
}

TEST(Propagate, ConstantAccelerationMatchesClosedForm) {
  const DcState s{4.0, exp_so3(Vec3(0.1, -0.3, 0.5)), Vec3(0.3, -0.4, 0.2)};
  const Vec3 a(0.5, 0.2, -0.1);
  const double dt = 0.01;
  const DcState out = propagate(s, a, dt);
  const Vec3 r = s.position() + dt * s.v + 0.5 * dt * dt * a;
  EXPECT_LT((out.position() - r).norm(), 1e-12);
  EXPECT_LT((out.v - (s.v + dt * a)).norm(), 1e-15);
}
