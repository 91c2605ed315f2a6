#include "dircoord/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dircoord/error.hpp"
#include "dircoord/measurements.hpp"

namespace dircoord::kernels {

namespace {

// k smallest squared distances kept sorted in `best` (size k).
double kth_sq_distance(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& reference, Eigen::Index i, int k,
                       bool exclude_self, std::vector<double>& best) {
  std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
  const Eigen::Index d = queries.rows();
  const double* q = queries.col(i).data();
  for (Eigen::Index j = 0; j < reference.cols(); ++j) {
    if (exclude_self && j == i) {
      continue;
    }
    const double* p = reference.col(j).data();
    double dist = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double diff = q[c] - p[c];
      dist += diff * diff;
    }
    if (dist < best[k - 1]) {
      int pos = k - 1;
      while (pos > 0 && best[pos - 1] > dist) {
        best[pos] = best[pos - 1];
        --pos;
      }
      best[pos] = dist;
    }
  }
  return best[k - 1];
}

}  // namespace

std::vector<double> knn_kth_distance(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& reference, int k,
                                     bool exclude_self, Exec exec) {
  if (queries.rows() != reference.rows()) {
    throw Error(ErrorKind::ConfigError, "k-NN clouds have different dimensions");
  }
  const Eigen::Index available = reference.cols() - (exclude_self ? 1 : 0);
  if (k < 1 || available < k) {
    throw Error(ErrorKind::ConfigError, "not enough reference points for k-NN");
  }
  const Eigen::Index n = queries.cols();
  std::vector<double> out(static_cast<std::size_t>(n));
  if (exec == Exec::Serial) {
    std::vector<double> best(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
      out[i] = std::sqrt(kth_sq_distance(queries, reference, i, k, exclude_self, best));
    }
    return out;
  }
#pragma omp parallel
  {
    std::vector<double> best(static_cast<std::size_t>(k));
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      out[i] = std::sqrt(kth_sq_distance(queries, reference, i, k, exclude_self, best));
    }
  }
  return out;
}

void range_log_likelihood(const Eigen::MatrixXd& states, double y, double var, std::span<double> out, Exec exec) {
  const Eigen::Index n = states.cols();
  const double inv = 1.0 / var;
  auto body = [&](Eigen::Index i) {
    const double res = y - states.block<3, 1>(0, i).norm();
    out[i] = -0.5 * res * res * inv;
  };
  if (exec == Exec::Serial) {
    for (Eigen::Index i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) body(i);
}

void ae_log_likelihood(const Eigen::MatrixXd& states, double alpha, double epsilon, const Eigen::Matrix2d& cov,
                       std::span<double> out, Exec exec) {
  const Eigen::Index n = states.cols();
  const Eigen::Matrix2d info = cov.inverse();
  auto body = [&](Eigen::Index i) {
    const Eigen::Vector3d r = states.block<3, 1>(0, i);
    const double a = std::atan2(r.y(), r.x());
    const double e = std::atan2(r.z(), std::hypot(r.x(), r.y()));
    const Eigen::Vector2d res(wrap_angle(alpha - a), wrap_angle(epsilon - e));
    out[i] = -0.5 * res.dot(info * res);
  };
  if (exec == Exec::Serial) {
    for (Eigen::Index i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) body(i);
}

void propagate_particles(Eigen::MatrixXd& states, const Eigen::Vector3d& accel, const Eigen::MatrixXd& noise,
                         double dt, Exec exec) {
  const Eigen::Index n = states.cols();
  auto body = [&](Eigen::Index i) {
    const Eigen::Vector3d a = accel + noise.col(i);
    states.block<3, 1>(0, i) += dt * states.block<3, 1>(3, i) + 0.5 * dt * dt * a;
    states.block<3, 1>(3, i) += dt * a;
  };
  if (exec == Exec::Serial) {
    for (Eigen::Index i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) body(i);
}

}  // namespace dircoord::kernels
