#pragma once

#include <cstdint>
#include <vector>

#include "dircoord/dircoords.hpp"
#include "dircoord/linalg.hpp"

namespace dircoord {

// Gaussian over Cartesian position (n = 3) or position+velocity (n = 6).
struct CartGaussian {
  VectorXd mean;
  MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }
  Vec3 position() const { return mean.head<3>(); }
};

// Gaussian over the error state [δρ, δφ (, δv)] about a nominal point.
struct DirGaussian {
  DirectionalCoord nominal;
  Vec3 velocity = Vec3::Zero();  // only meaningful when dim() == 6
  MatrixXd cov;

  int dim() const { return static_cast<int>(cov.rows()); }
};

enum class SigmaScheme { Unscented, SphericalCubature };

struct SigmaPointSet {
  std::vector<VectorXd> points;
  std::vector<double> weights;
};

SigmaPointSet sigma_points(const CartGaussian& g, SigmaScheme scheme);

// Converts a Cartesian belief by pushing sigma points through from_cartesian.
// The nominal is from_cartesian(mean); velocity (n = 6) passes through.
DirGaussian cart_to_dir(const CartGaussian& g, SigmaScheme scheme = SigmaScheme::SphericalCubature);

// Draws δx ~ N(0, cov) over the position block and maps (ρ̌+δρ)·Č·exp(δφ^)·e₁.
// Draws with ρ̌+δρ < 0 are kept (the point is reflected through the origin).
std::vector<Vec3> dir_to_cart_samples(const DirGaussian& g, std::size_t count, std::uint64_t seed);

std::vector<VectorXd> sample_cart(const CartGaussian& g, std::size_t count, std::uint64_t seed);

// First-order conversion of a directional covariance to Cartesian, through
// blockdiag(S(ρ, C), I).
MatrixXd dir_cov_to_cart(const DirectionalCoord& nominal, const MatrixXd& cov);

}  // namespace dircoord
