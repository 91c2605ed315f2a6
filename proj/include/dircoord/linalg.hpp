#pragma once

#include <Eigen/Core>

namespace dircoord {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd symmetrized(const MatrixXd& p) { return 0.5 * (p + p.transpose()); }

// Factor L with L·Lᵀ = cov: the Cholesky factor when cov is positive
// definite, otherwise V·sqrt(Λ) from the eigendecomposition with eigenvalues
// above -1e-10·max|λ| clamped to zero. Throws NotPSD beyond that.
MatrixXd covariance_factor(const MatrixXd& cov);

double min_eigenvalue(const MatrixXd& sym);

}  // namespace dircoord
