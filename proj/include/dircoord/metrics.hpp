#pragma once

#include <vector>

#include "dircoord/kernels.hpp"
#include "dircoord/linalg.hpp"

namespace dircoord {

struct ConsistencyRecord {
  double timestamp = 0.0;
  double nees = 0.0;
  double mahalanobis = 0.0;
  double err_norm = 0.0;  // |[r; v] error|
  double pos_err = 0.0;
  double vel_err = 0.0;
};

// δξᵀ P⁻¹ δξ by Cholesky solve. A singular P is accepted when δξ lies in its
// range (pseudo-inverse); otherwise throws SingularCovariance.
double nees(const VectorXd& dxi, const MatrixXd& p);
double mahalanobis(const VectorXd& dxi, const MatrixXd& p);

// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
double chi2_cdf(double x, double dof);

// Inverse χ²(dof) CDF at prob, by bisection.
double chi2_bound(double dof, double prob);

// k-NN divergence estimate D(p‖q) in nats for clouds stored column-wise:
//   (d/n)·Σᵢ ln(νₖ(i)/ρₖ(i)) + ln(m/(n-1))
// with ρₖ the k-th neighbour distance within p and νₖ the one into q.
// Zero neighbour distances trigger one deterministic 1e-12-scale jitter of
// both clouds; DuplicatePoints is thrown if they persist.
double kl_divergence_knn(const MatrixXd& p, const MatrixXd& q, int k,
                         kernels::Exec exec = kernels::Exec::Parallel);

struct AggregateSeries {
  std::vector<double> t;
  std::vector<double> mean_err;
  std::vector<double> mean_nees;
  double nees_bound = 0.0;  // chi2_bound(N·dim, prob) / N
  double time_avg_err = 0.0;
  std::size_t trials = 0;
  int dim = 0;

  // Fraction of steps with t >= t_min whose averaged NEES is below the bound.
  double fraction_below_bound(double t_min) const;
};

// Per-timestep averages over trials. Throws MisalignedTimestamps unless all
// trials share the same timestamps.
AggregateSeries aggregate_trials(const std::vector<std::vector<ConsistencyRecord>>& trials, int dim,
                                 double prob = 0.997);

// 100·(1 - proposed.time_avg_err / baseline.time_avg_err)
double error_reduction_percent(const AggregateSeries& proposed, const AggregateSeries& baseline);

}  // namespace dircoord
