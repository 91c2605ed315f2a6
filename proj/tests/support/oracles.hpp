#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <vector>

#include "dircoord/dircoords.hpp"
#include "dircoord/filters.hpp"
#include "dircoord/kinematics.hpp"
#include "dircoord/random.hpp"

namespace dircoord::oracle {

// Error coordinates of `truth` relative to the estimate `hat`, measured on positions.
inline Vec6 state_error(const DcState& hat, const DcState& truth) {
  Vec6 e;
  e(0) = truth.rho - hat.rho;
  e.segment<2>(1) = error_to_point(hat.coord(), truth.position()).d_phi;
  e.tail<3>() = truth.v - hat.v;
  return e;
}

inline DcState perturbed(const DcState& s, const Vec6& d) {
  DcState p = s;
  p.rho += d(0);
  p.c = s.c * exp_phi2(d.segment<2>(1));
  p.v += d.tail<3>();
  return p;
}

// Finite-difference A: central in the error coordinates, one-sided second order in time.
inline Mat6 fd_a_matrix(const DcState& s, double eps = 1e-4, double t = 1e-3) {
  const DcState s1 = propagate(s, Vec3::Zero(), t);
  const DcState s2 = propagate(s, Vec3::Zero(), 2 * t);
  Mat6 fd;
  for (int j = 0; j < 6; ++j) {
    Vec6 rate[2];
    for (int k = 0; k < 2; ++k) {
      const Vec6 d = (k == 0 ? eps : -eps) * Vec6::Unit(j);
      const DcState p = perturbed(s, d);
      const Vec6 e0 = state_error(s, p);
      const Vec6 e1 = state_error(s1, propagate(p, Vec3::Zero(), t));
      const Vec6 e2 = state_error(s2, propagate(p, Vec3::Zero(), 2 * t));
      rate[k] = (4 * e1 - e2 - 3 * e0) / (2 * t);
    }
    fd.col(j) = (rate[0] - rate[1]) / (2 * eps);
  }
  return fd;
}

inline DcState random_state(Rng& rng, double rho_min = 0.5, double rho_max = 50.0) {
  DcState s;
  s.rho = uniform(rng, rho_min, rho_max);
  s.c = exp_so3(Vec3(uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -3, 3)));
  s.v = Vec3(uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -3, 3));
  return s;
}

// Linear-Gaussian double integrator with position fixes, filtered by the
// Cartesian EKF whose model matches the simulation exactly. Returns the final
// NEES of each trial.
inline std::vector<double> linear_gaussian_nees(std::size_t trials, std::size_t steps, std::uint64_t seed) {
  const double dt = 0.1, q = 0.05, r = 0.2;
  const auto [ak, qk] = discretize(linearize_cart(), q * Mat3::Identity(), dt);
  const Eigen::MatrixXd lq = covariance_factor(qk);
  std::vector<double> out;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, trial));
    auto normal6 = [&] {
      Vec6 z;
      for (int i = 0; i < 6; ++i) z(i) = standard_normal(rng);
      return z;
    };
    const Mat6 p0 = Mat6::Identity();
    Vec6 x;
    x << 5, -2, 1, 0.5, 0.2, -0.1;
    const Vec6 x_hat = x + normal6();
    CartEkf f({x_hat.head<3>(), x_hat.tail<3>()}, p0, q * Mat3::Identity());
    for (std::size_t k = 0; k < steps; ++k) {
      x = ak * x + lq * normal6();
      f.predict(Vec3::Zero(), dt);
      LinearizedMeas lin;
      lin.h = Eigen::MatrixXd::Zero(3, 6);
      lin.h.leftCols<3>() = Mat3::Identity();
      lin.m = Eigen::MatrixXd::Identity(3, 3);
      lin.r = r * Eigen::MatrixXd::Identity(3, 3);
      const Vec3 y = x.head<3>() + std::sqrt(r) * Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng));
      lin.z = y - f.state().r;
      f.correct(lin);
    }
    const Vec6 e = f.error_to_truth(x.head<3>(), x.tail<3>());
    out.push_back(e.dot(f.covariance().ldlt().solve(e)));
  }
  return out;
}

}  // namespace dircoord::oracle
