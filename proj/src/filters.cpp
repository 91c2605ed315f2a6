#include "dircoord/filters.hpp"

#include <cmath>
#include <numbers>
#include <type_traits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dircoord/error.hpp"

namespace dircoord {

namespace {

constexpr double kMaxInnovationCondition = 1e12;
// Below a 1e-12 innovation std the covariance is round-off, and its
// correlations would be amplified into arbitrary corrections.
constexpr double kMinInnovationVariance = 1e-24;

double clamped_range(double rho, ClampLog* clamps) {
  if (rho < kMinRange) {
    if (clamps != nullptr) {
      ++clamps->count;
    }
    return kMinRange;
  }
  return rho;
}

LinearizedMeas linearize_dir(const Measurement& meas, const DirectionalCoord& nominal, int dim) {
  return std::visit(
      [&](const auto& m) -> LinearizedMeas {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RangeMeas>) {
          return range_innovation_dir(m, nominal, dim);
        } else if constexpr (std::is_same_v<T, AeMeas>) {
          return ae_innovation_dir(ae_to_dirvec(m, nominal.direction()), nominal, dim);
        } else {
          return ae_innovation_dir(m, nominal, dim);
        }
      },
      meas);
}

LinearizedMeas linearize_cart(const Measurement& meas, const Vec3& r_hat, int dim) {
  return std::visit(
      [&](const auto& m) -> LinearizedMeas {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RangeMeas>) {
          return range_innovation_cart(m, r_hat, dim);
        } else if constexpr (std::is_same_v<T, AeMeas>) {
          return ae_innovation_cart(m, r_hat, dim);
        } else {
          throw Error(ErrorKind::ConfigError, "the Cartesian filter takes raw azimuth/elevation, not a direction vector");
          return LinearizedMeas{};
        }
      },
      meas);
}

}  // namespace

KalmanGainStep kalman_gain(const MatrixXd& p, const LinearizedMeas& lin) {
  MatrixXd s = lin.h * p * lin.h.transpose() + lin.m * lin.r * lin.m.transpose();
  s = symmetrized(s);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > kMinInnovationVariance) || hi / lo > kMaxInnovationCondition) {
    throw Error(ErrorKind::SingularInnovation, "innovation covariance is singular or ill-conditioned");
  }
  const Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularInnovation, "innovation covariance Cholesky failed");
  }
  MatrixXd k = llt.solve(lin.h * p).transpose();
  return {std::move(k), lin.z, std::move(s)};
}

MatrixXd joseph_update(const MatrixXd& p, const MatrixXd& k, const LinearizedMeas& lin) {
  const MatrixXd ikh = MatrixXd::Identity(p.rows(), p.cols()) - k * lin.h;
  const MatrixXd km = k * lin.m;
  return symmetrized(ikh * p * ikh.transpose() + km * lin.r * km.transpose());
}

// ---------------------------------------------------------------------------
// Dckf

Dckf::Dckf(const DcState& state, const Mat6& p, const Mat3& qc) : state_(state), p_(p), qc_(qc) {
  if (!(state.rho > 0.0)) {
    throw Error(ErrorKind::ZeroRange, "filter range must be positive");
  }
}

Dckf Dckf::from_cartesian_prior(const CartGaussian& prior, const Mat3& qc, SigmaScheme scheme) {
  if (prior.dim() != 6) {
    throw Error(ErrorKind::ConfigError, "filter prior must be position+velocity");
  }
  const DirGaussian g = cart_to_dir(prior, scheme);
  return Dckf(DcState{g.nominal.rho, g.nominal.c, g.velocity}, g.cov, qc);
}

void Dckf::predict(const Vec3& accel, double dt) {
  const auto [ak, qk] = discretize(linearize(state_), qc_, dt);
  state_ = propagate(state_, accel, dt, &clamps_);
  p_ = ak * p_ * ak.transpose() + qk;
  p_ = 0.5 * (p_ + p_.transpose()).eval();
}

KalmanGainStep Dckf::correct(const LinearizedMeas& lin) {
  KalmanGainStep step = kalman_gain(p_, lin);
  const Vec6 dx = step.k * step.z;
  state_.rho = clamped_range(state_.rho + dx(0), &clamps_);
  state_.c = (state_.c * exp_phi2(dx.segment<2>(1))).orthonormalized();
  state_.v += dx.tail<3>();
  p_ = joseph_update(p_, step.k, lin);
  return step;
}

KalmanGainStep Dckf::correct(const RangeMeas& meas) { return correct(range_innovation_dir(meas, state_.coord(), 6)); }

KalmanGainStep Dckf::correct(const AeMeas& meas) {
  const DirectionalCoord nominal = state_.coord();
  return correct(ae_innovation_dir(ae_to_dirvec(meas, nominal.direction(), ae_conversion_), nominal, 6));
}

Vec6 Dckf::error_to_truth(const Vec3& r_true, const Vec3& v_true) const {
  const DirErrorVec e = error_to_point(state_.coord(), r_true);
  Vec6 out;
  out << e.stacked(), v_true - state_.v;
  return out;
}

Mat6 Dckf::cartesian_covariance() const { return dir_cov_to_cart(state_.coord(), p_); }

// ---------------------------------------------------------------------------
// CartEkf

CartEkf::CartEkf(const CartState& state, const Mat6& p, const Mat3& qc) : state_(state), p_(p), qc_(qc) {}

CartEkf CartEkf::from_cartesian_prior(const CartGaussian& prior, const Mat3& qc) {
  if (prior.dim() != 6) {
    throw Error(ErrorKind::ConfigError, "filter prior must be position+velocity");
  }
  return CartEkf(CartState{prior.mean.head<3>(), prior.mean.tail<3>()}, prior.cov, qc);
}

void CartEkf::predict(const Vec3& accel, double dt) {
  const auto [ak, qk] = discretize(linearize_cart(), qc_, dt);
  state_ = propagate_cart(state_, accel, dt);
  p_ = ak * p_ * ak.transpose() + qk;
  p_ = 0.5 * (p_ + p_.transpose()).eval();
}

KalmanGainStep CartEkf::correct(const LinearizedMeas& lin) {
  KalmanGainStep step = kalman_gain(p_, lin);
  const Vec6 dx = step.k * step.z;
  state_.r += dx.head<3>();
  state_.v += dx.tail<3>();
  p_ = joseph_update(p_, step.k, lin);
  return step;
}

KalmanGainStep CartEkf::correct(const RangeMeas& meas) { return correct(range_innovation_cart(meas, state_.r, 6)); }

KalmanGainStep CartEkf::correct(const AeMeas& meas) { return correct(ae_innovation_cart(meas, state_.r, 6)); }

Vec6 CartEkf::error_to_truth(const Vec3& r_true, const Vec3& v_true) const {
  Vec6 out;
  out << r_true - state_.r, v_true - state_.v;
  return out;
}

// ---------------------------------------------------------------------------
// Particle filter

MatrixXd ParticleCloud::covariance() const {
  const VectorXd mu = mean();
  const MatrixXd centered = states.colwise() - mu;
  return symmetrized(centered * weights.asDiagonal() * centered.transpose());
}

ParticleCloud make_cloud(const CartGaussian& prior, std::size_t count, std::uint64_t seed) {
  if (count == 0) {
    throw Error(ErrorKind::ConfigError, "particle cloud needs at least one particle");
  }
  const std::vector<VectorXd> samples = sample_cart(prior, count, seed);
  ParticleCloud pc;
  pc.states.resize(prior.dim(), static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    pc.states.col(static_cast<Eigen::Index>(i)) = samples[i];
  }
  pc.weights = VectorXd::Constant(static_cast<Eigen::Index>(count), 1.0 / static_cast<double>(count));
  return pc;
}

ParticleCloud resample_systematic(const ParticleCloud& pc, std::size_t count, Rng& rng) {
  const double step = 1.0 / static_cast<double>(count);
  double u = uniform(rng, 0.0, step);
  ParticleCloud out;
  out.degenerate_resets = pc.degenerate_resets;
  out.states.resize(pc.states.rows(), static_cast<Eigen::Index>(count));
  Eigen::Index src = 0;
  double cumulative = pc.weights(0);
  const Eigen::Index last = pc.size() - 1;
  for (std::size_t m = 0; m < count; ++m) {
    while (u > cumulative && src < last) {
      ++src;
      cumulative += pc.weights(src);
    }
    out.states.col(static_cast<Eigen::Index>(m)) = pc.states.col(src);
    u += step;
  }
  out.weights = VectorXd::Constant(static_cast<Eigen::Index>(count), step);
  return out;
}

ParticleCloud pf_step(ParticleCloud pc, const Vec3& accel, double dt, double accel_std,
                      const std::optional<Measurement>& meas, Rng& rng, kernels::Exec exec) {
  const Eigen::Index n = pc.size();
  if (n < 1) {
    throw Error(ErrorKind::ConfigError, "particle cloud is empty");
  }
  if (pc.states.rows() == 6 && dt > 0.0) {
    MatrixXd noise(3, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) {
        noise(c, i) = accel_std * standard_normal(rng);
      }
    }
    kernels::propagate_particles(pc.states, accel, noise, dt, exec);
  }
  if (!meas) {
    return pc;
  }

  std::vector<double> loglik(static_cast<std::size_t>(n));
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RangeMeas>) {
          kernels::range_log_likelihood(pc.states, m.y, m.var, loglik, exec);
        } else if constexpr (std::is_same_v<T, AeMeas>) {
          kernels::ae_log_likelihood(pc.states, m.alpha, m.epsilon, m.cov, loglik, exec);
        } else {
          throw Error(ErrorKind::ConfigError, "particle filter weights raw range or azimuth/elevation only");
        }
      },
      *meas);

  double max_log = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    loglik[i] += std::log(pc.weights(i));
    max_log = std::max(max_log, loglik[i]);
  }
  double total = 0.0;
  if (std::isfinite(max_log)) {
    for (Eigen::Index i = 0; i < n; ++i) {
      pc.weights(i) = std::exp(loglik[i] - max_log);
      total += pc.weights(i);
    }
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    pc.weights.setConstant(1.0 / static_cast<double>(n));
    ++pc.degenerate_resets;
    return pc;
  }
  pc.weights /= total;
  if (pc.effective_sample_size() < 0.5 * static_cast<double>(n)) {
    return resample_systematic(pc, static_cast<std::size_t>(n), rng);
  }
  return pc;
}

// ---------------------------------------------------------------------------
// Static single corrections

DirGaussian static_correct_dir(const DirGaussian& prior, const Measurement& meas) {
  const int dim = prior.dim();
  const LinearizedMeas lin = linearize_dir(meas, prior.nominal, dim);
  const KalmanGainStep step = kalman_gain(prior.cov, lin);
  const VectorXd dx = step.k * step.z;
  DirGaussian post;
  post.nominal.rho = clamped_range(prior.nominal.rho + dx(0), nullptr);
  post.nominal.c = (prior.nominal.c * exp_phi2(dx.segment<2>(1))).orthonormalized();
  post.velocity = prior.velocity;
  if (dim == 6) {
    post.velocity += dx.tail<3>();
  }
  post.cov = joseph_update(prior.cov, step.k, lin);
  return post;
}

CartGaussian static_correct_cart(const CartGaussian& prior, const Measurement& meas) {
  const LinearizedMeas lin = linearize_cart(meas, prior.position(), prior.dim());
  const KalmanGainStep step = kalman_gain(prior.cov, lin);
  return {prior.mean + step.k * step.z, joseph_update(prior.cov, step.k, lin)};
}

}  // namespace dircoord
