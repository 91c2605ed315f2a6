#include "dircoord/belief.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dircoord/error.hpp"
#include "dircoord/kinematics.hpp"
#include "dircoord/random.hpp"

namespace dircoord {

MatrixXd covariance_factor(const MatrixXd& cov) {
  const MatrixXd sym = symmetrized(cov);
  const Eigen::LLT<MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
  const VectorXd& lambda = eig.eigenvalues();
  const double tol = 1e-10 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if (!sym.allFinite() || lambda.minCoeff() < -tol) {
    throw Error(ErrorKind::NotPSD, "covariance is not positive semi-definite");
  }
  return eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

double min_eigenvalue(const MatrixXd& sym) {
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrized(sym), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

SigmaPointSet sigma_points(const CartGaussian& g, SigmaScheme scheme) {
  const int n = g.dim();
  const MatrixXd l = covariance_factor(g.cov);
  SigmaPointSet set;
  if (scheme == SigmaScheme::SphericalCubature) {
    const double scale = std::sqrt(static_cast<double>(n));
    const double w = 1.0 / (2.0 * n);
    for (int i = 0; i < n; ++i) {
      set.points.push_back(g.mean + scale * l.col(i));
      set.weights.push_back(w);
    }
    for (int i = 0; i < n; ++i) {
      set.points.push_back(g.mean - scale * l.col(i));
      set.weights.push_back(w);
    }
    return set;
  }
  // Classic unscented transform with kappa = 3 - n.
  const double kappa = 3.0 - n;
  const double scale = std::sqrt(n + kappa);
  const double w = 1.0 / (2.0 * (n + kappa));
  set.points.push_back(g.mean);
  set.weights.push_back(kappa / (n + kappa));
  for (int i = 0; i < n; ++i) {
    set.points.push_back(g.mean + scale * l.col(i));
    set.weights.push_back(w);
  }
  for (int i = 0; i < n; ++i) {
    set.points.push_back(g.mean - scale * l.col(i));
    set.weights.push_back(w);
  }
  return set;
}

DirGaussian cart_to_dir(const CartGaussian& g, SigmaScheme scheme) {
  const int n = g.dim();
  if (n != 3 && n != 6) {
    throw Error(ErrorKind::ConfigError, "Cartesian belief must have dimension 3 or 6");
  }
  if (!(g.position().norm() > 1e-6)) {
    throw Error(ErrorKind::MeanAtOrigin, "mean position at the origin has no direction");
  }
  DirGaussian out;
  out.nominal = from_cartesian(g.position());
  if (n == 6) {
    out.velocity = g.mean.tail<3>();
  }
  out.cov = MatrixXd::Zero(n, n);
  const SigmaPointSet set = sigma_points(g, scheme);
  VectorXd dxi(n);
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    const VectorXd& s = set.points[i];
    dxi.head<3>() = error_to_point(out.nominal, s.head<3>()).stacked();
    if (n == 6) {
      dxi.tail<3>() = s.tail<3>() - out.velocity;
    }
    out.cov += set.weights[i] * dxi * dxi.transpose();
  }
  out.cov = symmetrized(out.cov);
  return out;
}

std::vector<Vec3> dir_to_cart_samples(const DirGaussian& g, std::size_t count, std::uint64_t seed) {
  if (count == 0) {
    throw Error(ErrorKind::ConfigError, "sample count must be positive");
  }
  const MatrixXd l = covariance_factor(g.cov.topLeftCorner(3, 3));
  Rng rng(seed);
  std::vector<Vec3> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec3 z;
    for (int c = 0; c < 3; ++c) z(c) = standard_normal(rng);
    const Vec3 dx = l * z;
    const double rho = g.nominal.rho + dx(0);
    const Vec3 local = exp_phi2(dx.tail<2>()).matrix().col(0);
    out.push_back(rho * (g.nominal.c.matrix() * local));
  }
  return out;
}

std::vector<VectorXd> sample_cart(const CartGaussian& g, std::size_t count, std::uint64_t seed) {
  if (count == 0) {
    throw Error(ErrorKind::ConfigError, "sample count must be positive");
  }
  const MatrixXd l = covariance_factor(g.cov);
  Rng rng(seed);
  std::vector<VectorXd> out;
  out.reserve(count);
  VectorXd z(g.dim());
  for (std::size_t i = 0; i < count; ++i) {
    for (int c = 0; c < g.dim(); ++c) z(c) = standard_normal(rng);
    out.push_back(g.mean + l * z);
  }
  return out;
}

MatrixXd dir_cov_to_cart(const DirectionalCoord& nominal, const MatrixXd& cov) {
  const Eigen::Index n = cov.rows();
  MatrixXd j = MatrixXd::Identity(n, n);
  j.topLeftCorner(3, 3) = s_matrix(nominal.rho, nominal.c);
  return symmetrized(j * cov * j.transpose());
}

}  // namespace dircoord
