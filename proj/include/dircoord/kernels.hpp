#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dircoord::kernels {

// Every data-parallel kernel has a serial reference path and an OpenMP path.
// Both produce bitwise-identical results: each output element is computed by
// exactly one iteration with the same arithmetic.
enum class Exec { Serial, Parallel };

// Distance from each column of `queries` to its k-th nearest column of
// `reference` (brute force). With exclude_self, query i skips reference
// column i (queries and reference must then be the same cloud).
std::vector<double> knn_kth_distance(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& reference, int k,
                                     bool exclude_self, Exec exec = Exec::Parallel);

// Gaussian range log-likelihood (up to a constant) of y for each particle
// position, where positions are the first three rows of `states`.
void range_log_likelihood(const Eigen::MatrixXd& states, double y, double var, std::span<double> out,
                          Exec exec = Exec::Parallel);

// Gaussian azimuth/elevation log-likelihood with wrapped angle residuals.
void ae_log_likelihood(const Eigen::MatrixXd& states, double alpha, double epsilon, const Eigen::Matrix2d& cov,
                       std::span<double> out, Exec exec = Exec::Parallel);

// Exact constant-acceleration double-integrator step with per-particle acceleration noise
// (noise is 3×N, pre-drawn by the caller so results do not depend on threads).
void propagate_particles(Eigen::MatrixXd& states, const Eigen::Vector3d& accel, const Eigen::MatrixXd& noise,
                         double dt, Exec exec = Exec::Parallel);

}  // namespace dircoord::kernels
