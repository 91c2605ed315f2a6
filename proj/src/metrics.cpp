#include "dircoord/metrics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dircoord/error.hpp"
#include "dircoord/random.hpp"

namespace dircoord {

double nees(const VectorXd& dxi, const MatrixXd& p) {
  const Eigen::LLT<MatrixXd> llt(symmetrized(p));
  if (llt.info() == Eigen::Success) {
    return llt.matrixL().solve(dxi).squaredNorm();
  }
  // Semi-definite P: the error must lie in its range; use the pseudo-inverse there.
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrized(p));
  const VectorXd& lambda = eig.eigenvalues();
  const VectorXd proj = eig.eigenvectors().transpose() * dxi;
  const double tol = 1e-12 * std::max(lambda.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  double out = 0.0, null_sq = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > tol) {
      out += proj(i) * proj(i) / lambda(i);
    } else if (lambda(i) < -tol) {
      throw Error(ErrorKind::SingularCovariance, "covariance has a negative eigenvalue");
    } else {
      null_sq += proj(i) * proj(i);
    }
  }
  if (std::sqrt(null_sq) > 1e-9 * std::max(1.0, dxi.norm())) {
    throw Error(ErrorKind::SingularCovariance, "error has a component outside the covariance's range");
  }
  return out;
}

double mahalanobis(const VectorXd& dxi, const MatrixXd& p) { return std::sqrt(nees(dxi, p)); }

double regularized_gamma_p(double a, double x) {
  if (x <= 0.0) {
    return 0.0;
  }
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  if (x < a + 1.0) {
    // Series: P = e^{-x} x^a / Γ(a+1) · Σ xⁿ / ((a+1)…(a+n)).
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return std::exp(log_prefix) * sum;
  }
  // Continued fraction for Q (modified Lentz).
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return 1.0 - std::exp(log_prefix) * h;
}

double chi2_cdf(double x, double dof) { return regularized_gamma_p(0.5 * dof, 0.5 * x); }

double chi2_bound(double dof, double prob) {
  if (!(dof >= 1.0) || !(prob > 0.0 && prob < 1.0)) {
    throw Error(ErrorKind::ConfigError, "chi2_bound needs dof >= 1 and prob in (0, 1)");
  }
  double lo = 0.0;
  double hi = dof + 10.0 * std::sqrt(2.0 * dof) + 10.0;
  while (chi2_cdf(hi, dof) < prob) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, dof) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

bool any_zero(const std::vector<double>& v) {
  for (double x : v) {
    if (!(x > 0.0)) return true;
  }
  return false;
}

void jitter(MatrixXd& cloud, std::uint64_t seed) {
  const double scale = 1e-12 * std::max(1.0, cloud.cwiseAbs().maxCoeff());
  Rng rng(seed);
  for (Eigen::Index j = 0; j < cloud.cols(); ++j) {
    for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
      cloud(i, j) += uniform(rng, -scale, scale);
    }
  }
}

}  // namespace

double kl_divergence_knn(const MatrixXd& p, const MatrixXd& q, int k, kernels::Exec exec) {
  const Eigen::Index n = p.cols();
  const Eigen::Index m = q.cols();
  if (p.rows() != q.rows() || n < k + 1 || m < k + 1) {
    throw Error(ErrorKind::ConfigError, "k-NN divergence needs matching dimensions and more than k points");
  }
  std::vector<double> rho = kernels::knn_kth_distance(p, p, k, true, exec);
  std::vector<double> nu = kernels::knn_kth_distance(p, q, k, false, exec);
  if (any_zero(rho) || any_zero(nu)) {
    MatrixXd pj = p;
    MatrixXd qj = q;
    jitter(pj, 0x6b6e6e70ULL);
    jitter(qj, 0x6b6e6e71ULL);
    rho = kernels::knn_kth_distance(pj, pj, k, true, exec);
    nu = kernels::knn_kth_distance(pj, qj, k, false, exec);
    if (any_zero(rho) || any_zero(nu)) {
      throw Error(ErrorKind::DuplicatePoints, "zero nearest-neighbour distance after jitter");
    }
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += std::log(nu[i] / rho[i]);
  }
  const double d = static_cast<double>(p.rows());
  return d / static_cast<double>(n) * sum + std::log(static_cast<double>(m) / static_cast<double>(n - 1));
}

double AggregateSeries::fraction_below_bound(double t_min) const {
  std::size_t total = 0;
  std::size_t below = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_min) continue;
    ++total;
    if (mean_nees[i] < nees_bound) ++below;
  }
  return total == 0 ? 0.0 : static_cast<double>(below) / static_cast<double>(total);
}

AggregateSeries aggregate_trials(const std::vector<std::vector<ConsistencyRecord>>& trials, int dim, double prob) {
  if (trials.empty()) {
    throw Error(ErrorKind::MisalignedTimestamps, "no trials to aggregate");
  }
  const std::size_t steps = trials.front().size();
  for (const auto& trial : trials) {
    if (trial.size() != steps) {
      throw Error(ErrorKind::MisalignedTimestamps, "trials have different lengths");
    }
    for (std::size_t i = 0; i < steps; ++i) {
      if (trial[i].timestamp != trials.front()[i].timestamp) {
        throw Error(ErrorKind::MisalignedTimestamps, "trial timestamps differ");
      }
    }
  }
  const double count = static_cast<double>(trials.size());
  AggregateSeries out;
  out.trials = trials.size();
  out.dim = dim;
  out.t.resize(steps);
  out.mean_err.assign(steps, 0.0);
  out.mean_nees.assign(steps, 0.0);
  for (std::size_t i = 0; i < steps; ++i) {
    out.t[i] = trials.front()[i].timestamp;
    for (const auto& trial : trials) {
      out.mean_err[i] += trial[i].err_norm;
      out.mean_nees[i] += trial[i].nees;
    }
    out.mean_err[i] /= count;
    out.mean_nees[i] /= count;
  }
  double total = 0.0;
  for (double e : out.mean_err) total += e;
  out.time_avg_err = steps == 0 ? 0.0 : total / static_cast<double>(steps);
  out.nees_bound = chi2_bound(count * dim, prob) / count;
  return out;
}

double error_reduction_percent(const AggregateSeries& proposed, const AggregateSeries& baseline) {
  return 100.0 * (1.0 - proposed.time_avg_err / baseline.time_avg_err);
}

}  // namespace dircoord
