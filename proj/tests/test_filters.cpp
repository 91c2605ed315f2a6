#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "dircoord/error.hpp"
#include "dircoord/filters.hpp"
#include "dircoord/random.hpp"

using namespace dircoord;

namespace {

Mat6 block_diag_prior(double var_rho, double var_phi, double var_v) {
  Vec6 d;
  d << var_rho, var_phi, var_phi, var_v, var_v, var_v;
  return d.asDiagonal();
}

CartGaussian cart_prior(const Vec6& mean, const Vec6& std) {
  CartGaussian g;
  g.mean = mean;
  g.cov = std.cwiseAbs2().asDiagonal();
  return g;
}

double min_eig(const MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace

TEST(Dckf, RangeUpdateReproducesScalarKalman) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double rho = uniform(rng, 1, 30), s2 = uniform(rng, 0.01, 4), r = uniform(rng, 0.001, 1);
    const DcState st{rho, exp_so3(Vec3(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2))),
                     Vec3(1, 2, 3)};
    Dckf f(st, block_diag_prior(s2, 0.01, 0.5), Mat3::Identity());
    const double y = rho + uniform(rng, -1, 1);
    f.correct(RangeMeas{y, r});
    EXPECT_NEAR(f.state().rho, rho + s2 / (s2 + r) * (y - rho), 1e-10);
    EXPECT_NEAR(f.covariance()(0, 0), s2 * r / (s2 + r), 1e-10);
    EXPECT_LT((f.state().c.matrix() - st.c.matrix()).norm(), 1e-12);
    EXPECT_EQ(f.state().v, st.v);
    EXPECT_LT((f.covariance().bottomRightCorner<5, 5>() - block_diag_prior(s2, 0.01, 0.5).bottomRightCorner<5, 5>())
                  .norm(),
              1e-15);
  }
}

TEST(Dckf, ZeroInnovationKeepsStateAndShrinksCovariance) {
  const DcState st{5.0, exp_so3(Vec3(0.3, 0.1, -0.2)), Vec3(0.1, 0.2, 0.3)};
  Mat6 p = block_diag_prior(0.5, 0.02, 1.0);
  p(0, 3) = p(3, 0) = 0.1;
  Dckf f(st, p, Mat3::Identity());
  f.correct(RangeMeas{5.0, 0.1});
  f.correct(AeMeas{std::atan2(st.position().y(), st.position().x()),
                   std::asin(st.position().z() / 5.0), 0.01 * Mat2::Identity()});
  EXPECT_NEAR(f.state().rho, 5.0, 1e-14);
  EXPECT_LT((f.state().position() - st.position()).norm(), 1e-12);
  EXPECT_LT((f.state().v - st.v).norm(), 1e-14);
  EXPECT_LT(f.covariance().trace(), p.trace());
  for (int i = 0; i < 6; ++i) EXPECT_LE(f.covariance()(i, i), p(i, i) + 1e-12);
}

TEST(Dckf, PredictWithoutNoiseOrMotionKeepsCovariance) {
  const Mat6 p = block_diag_prior(0.5, 0.02, 1.0);
  Dckf f({5.0, Rotation::identity(), Vec3::Zero()}, p, Mat3::Zero());
  f.predict(Vec3::Zero(), 0.01);
  Mat6 a = Mat6::Identity();
  a.block<3, 3>(0, 3) = s_inverse(5.0, Rotation::identity()) * 0.01;
  // Only velocity uncertainty leaks into position; with zero velocity variance nothing changes.
  Dckf g({5.0, Rotation::identity(), Vec3::Zero()}, block_diag_prior(0.5, 0.02, 0.0), Mat3::Zero());
  g.predict(Vec3::Zero(), 0.01);
  EXPECT_LT((g.covariance() - block_diag_prior(0.5, 0.02, 0.0)).norm(), 1e-15);
  EXPECT_LT((f.covariance() - a * p * a.transpose()).norm(), 1e-12);
}

TEST(Dckf, TraceGrowsUnderProcessNoise) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const DcState st{uniform(rng, 2, 30), exp_so3(Vec3(uniform(rng, -2, 2), uniform(rng, -2, 2), 0.3)),
                     Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1))};
    Dckf f(st, block_diag_prior(0.2, 0.001, 0.1), 0.5 * Mat3::Identity());
    const double before = f.covariance().trace();
    f.predict(Vec3::Zero(), 0.01);
    EXPECT_GE(f.covariance().trace(), before);
    EXPECT_LT((f.covariance() - f.covariance().transpose()).norm(), 1e-12);
  }
}

TEST(Dckf, PredictionOnlyCartesianTraceGrows) {
  const DcState st{6.0, exp_so3(Vec3(0.2, 0.5, -0.4)), Vec3(1.0, -0.5, 0.8)};
  Dckf f(st, block_diag_prior(0.3, 0.01, 0.2), 0.01 * Mat3::Identity());
  double prev = f.cartesian_covariance().trace();
  for (int k = 0; k < 2000; ++k) {
    f.predict(Vec3(0.1, 0, -0.1), 0.01);
    const double tr = f.cartesian_covariance().trace();
    ASSERT_GE(tr, prev - 1e-9 * prev) << k;
    prev = tr;
  }
}

TEST(CartEkf, RangeUpdateOnAxisReproducesScalarKalman) {
  const double s2 = 0.8, r = 0.3;
  Mat6 p = Mat6::Identity() * 0.5;
  p(0, 0) = s2;
  CartEkf f({Vec3(7, 0, 0), Vec3::Zero()}, p, Mat3::Identity());
  f.correct(RangeMeas{7.5, r});
  EXPECT_NEAR(f.state().r.x(), 7 + s2 / (s2 + r) * 0.5, 1e-12);
  EXPECT_NEAR(f.covariance()(0, 0), s2 * r / (s2 + r), 1e-12);
  EXPECT_EQ(f.state().r.tail<2>(), Eigen::Vector2d::Zero());

  CartEkf g({Vec3(3, 0, 4), Vec3(1, 1, 1)}, p, Mat3::Identity());
  g.correct(RangeMeas{5.0, r});
  EXPECT_LT((g.state().r - Vec3(3, 0, 4)).norm(), 1e-14);
}

TEST(CartEkf, PredictIsExactDoubleIntegrator) {
  CartEkf f({Vec3(1, 2, 3), Vec3(1, 0, -1)}, Mat6::Identity(), Mat3::Zero());
  f.predict(Vec3(0, 0, 2), 0.5);
  EXPECT_LT((f.state().r - Vec3(1.5, 2, 2.75)).norm(), 1e-15);
  EXPECT_LT((f.state().v - Vec3(1, 0, 0)).norm(), 1e-15);
  Mat6 a = Mat6::Identity();
  a.topRightCorner<3, 3>() = 0.5 * Mat3::Identity();
  EXPECT_LT((f.covariance() - a * a.transpose()).norm(), 1e-14);
}

TEST(Joseph, PsdWithSuboptimalGain) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    MatrixXd b = MatrixXd::Random(6, 6);
    const MatrixXd p = b * b.transpose() + 1e-3 * MatrixXd::Identity(6, 6);
    LinearizedMeas lin;
    lin.h = MatrixXd::Random(2, 6);
    lin.m = MatrixXd::Identity(2, 2);
    lin.r = 0.1 * MatrixXd::Identity(2, 2);
    lin.z = VectorXd::Zero(2);
    const MatrixXd k = kalman_gain(p, lin).k * uniform(rng, -3, 3) + 0.5 * MatrixXd::Random(6, 2);
    const MatrixXd post = joseph_update(p, k, lin);
    EXPECT_GE(min_eig(post), -1e-9 * post.trace());
    EXPECT_LT((post - post.transpose()).norm(), 1e-12);

    const MatrixXd opt = joseph_update(p, kalman_gain(p, lin).k, lin);
    for (int d = 0; d < 6; ++d) EXPECT_LE(opt(d, d), p(d, d) + 1e-12);
  }
}

TEST(KalmanGain, SingularInnovationThrows) {
  LinearizedMeas lin;
  lin.h = MatrixXd::Zero(1, 3);
  lin.h(0, 0) = 1;
  lin.m = MatrixXd::Identity(1, 1);
  lin.r = MatrixXd::Zero(1, 1);
  lin.z = VectorXd::Zero(1);
  try {
    kalman_gain(MatrixXd::Zero(3, 3), lin);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularInnovation);
  }
}

TEST(LinearRegime, DckfAndEkfAgree) {
  // All default noise levels scaled by 1e-4.
  const double k = 1e-4;
  Vec6 mean;
  mean << 8, -3, 4, 0.5, 1.0, -0.2;
  Vec6 std;
  std << 5, 5, 5, 3, 3, 3;
  const CartGaussian prior = cart_prior(mean, k * std);
  const Mat3 qc = std::pow(0.1 * k, 2) / 100.0 * Mat3::Identity();
  Dckf dckf = Dckf::from_cartesian_prior(prior, qc);
  CartEkf ekf = CartEkf::from_cartesian_prior(prior, qc);
  const double frob0 = (dckf.cartesian_covariance() - ekf.covariance()).norm() / ekf.covariance().norm();
  EXPECT_LT(frob0, 0.01);

  Rng rng(4);
  Vec3 r = mean.head<3>(), v = mean.tail<3>();
  const Vec3 a(0.1, -0.2, 0.05);
  for (int step = 1; step <= 200; ++step) {
    dckf.predict(a, 0.01);
    ekf.predict(a, 0.01);
    r += 0.01 * v;
    v += 0.01 * a;
    if (step % 10 == 0) {
      const RangeMeas rm = simulate_range(r, 0.1 * k, rng);
      const AeMeas am = simulate_ae(r, 0.8 * k, rng);
      dckf.correct(rm);
      ekf.correct(rm);
      dckf.correct(am);
      ekf.correct(am);
    }
  }
  const double scale = std::sqrt(ekf.covariance().topLeftCorner<3, 3>().trace());
  EXPECT_LT((dckf.state().position() - ekf.state().r).norm(), 0.01 * scale);
  EXPECT_LT((dckf.state().v - ekf.state().v).norm(), 0.01 * std::sqrt(ekf.covariance().trace()));
  EXPECT_LT((dckf.cartesian_covariance() - ekf.covariance()).norm() / ekf.covariance().norm(), 0.01);
}

TEST(StaticCorrection, ExactRangeAtPriorMeanKeepsMean) {
  CartGaussian prior;
  prior.mean = Vec3(3, 4, 0);
  prior.cov = Mat3::Identity() * 0.2;
  const DirGaussian d = cart_to_dir(prior);
  const DirGaussian post = static_correct_dir(d, RangeMeas{5.0, 0.0});
  EXPECT_NEAR(post.nominal.rho, d.nominal.rho, 1e-14);
  EXPECT_LT((post.nominal.c.matrix() - d.nominal.c.matrix()).norm(), 1e-14);
  EXPECT_NEAR(post.cov(0, 0), 0.0, 1e-14);
  const CartGaussian cpost = static_correct_cart(prior, RangeMeas{5.0, 0.0});
  EXPECT_LT((cpost.mean - prior.mean).norm(), 1e-14);
}

TEST(StaticCorrection, DirectionalRangeJacobianIsStateIndependent) {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const DirectionalCoord x{uniform(rng, 1, 20), exp_so3(Vec3(uniform(rng, -3, 3), 0.2, 0.1))};
    EXPECT_EQ(range_innovation_dir({1.0, 0.1}, x, 3).h, range_innovation_dir({1.0, 0.1}, {2.0, Rotation()}, 3).h);
  }
}

TEST(ParticleFilter, NoMeasurementKeepsPriorMoments) {
  Vec6 mean;
  mean << 5, 1, -2, 0.3, 0.1, 0.0;
  Vec6 std;
  std << 1, 0.5, 0.2, 0.4, 0.3, 0.2;
  const CartGaussian prior = cart_prior(mean, std);
  ParticleCloud pc = make_cloud(prior, 100000, 7);
  Rng rng(8);
  pc = pf_step(pc, Vec3::Zero(), 0.0, 0.0, std::nullopt, rng);
  const VectorXd m = pc.mean();
  for (int i = 0; i < 6; ++i) EXPECT_LT(std::abs(m(i) - mean(i)), 3.0 * std(i) / std::sqrt(1e5));
  EXPECT_LT((pc.covariance() - prior.cov).norm() / prior.cov.norm(), 0.02);
}

TEST(ParticleFilter, LinearGaussianMatchesKalman) {
  // Range to a point far along x with negligible lateral spread is linear in x.
  const double s2 = 0.25, r = 0.04, y = 10.3;
  CartGaussian prior;
  prior.mean = Vec3(10, 0, 0);
  prior.cov = Vec3(s2, 1e-12, 1e-12).asDiagonal();
  ParticleCloud pc = make_cloud(prior, 100000, 9);
  Rng rng(10);
  const double ess_before = pc.effective_sample_size();
  EXPECT_NEAR(ess_before, 1e5, 1e-6);
  pc = pf_step(pc, Vec3::Zero(), 0.0, 0.0, Measurement(RangeMeas{y, r}), rng);
  const double post_mean = 10 + s2 / (s2 + r) * (y - 10);
  const double post_var = s2 * r / (s2 + r);
  const double ess = pc.effective_sample_size();
  EXPECT_LT(std::abs(pc.mean()(0) - post_mean), 3.0 * std::sqrt(post_var / ess));
  EXPECT_LT(std::abs(pc.covariance()(0, 0) - post_var), 3.0 * post_var * std::sqrt(2.0 / ess));
}

TEST(ParticleFilter, PreciseMeasurementsCollapseCloud) {
  CartGaussian prior;
  prior.mean = Vec3(6, 2, 1);
  prior.cov = Mat3::Identity();
  const Vec3 truth(6.3, 1.8, 1.2);
  ParticleCloud pc = make_cloud(prior, 100000, 11);
  Rng rng(12);
  const auto [a, e] = direction_to_ae(truth.normalized());
  pc = pf_step(pc, Vec3::Zero(), 0.0, 0.0, Measurement(RangeMeas{truth.norm(), 1e-6}), rng);
  pc = pf_step(pc, Vec3::Zero(), 0.0, 0.0, Measurement(AeMeas{a, e, 1e-6 * Mat2::Identity()}), rng);
  EXPECT_LT((pc.mean() - truth).norm(), 0.2);
  EXPECT_LT(pc.covariance().trace(), 0.05);
}

TEST(ParticleFilter, DegenerateLikelihoodResetsWeights) {
  CartGaussian prior;
  prior.mean = Vec3(6, 2, 1);
  prior.cov = Mat3::Identity() * 1e-4;
  ParticleCloud pc = make_cloud(prior, 100, 13);
  Rng rng(14);
  pc = pf_step(pc, Vec3::Zero(), 0.0, 0.0, Measurement(RangeMeas{1e6, 1e-300}), rng);
  EXPECT_EQ(pc.degenerate_resets, 1u);
  EXPECT_NEAR(pc.weights.sum(), 1.0, 1e-12);
}

TEST(ParticleFilter, SerialAndParallelAgree) {
  Vec6 mean;
  mean << 5, 1, -2, 0.3, 0.1, 0.0;
  const CartGaussian prior = cart_prior(mean, Vec6::Constant(0.5));
  const ParticleCloud pc = make_cloud(prior, 5000, 15);
  Rng r1(16), r2(16);
  const Measurement m = RangeMeas{5.5, 0.01};
  const ParticleCloud a = pf_step(pc, Vec3(0, 0, 1), 0.01, 0.1, m, r1, kernels::Exec::Serial);
  const ParticleCloud b = pf_step(pc, Vec3(0, 0, 1), 0.01, 0.1, m, r2, kernels::Exec::Parallel);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.weights, b.weights);
}
