// Serial vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare scaling.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dircoord/kernels.hpp"

namespace {

using dircoord::kernels::Exec;

Eigen::MatrixXd random_cloud(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 3.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng) + (i == 0 ? 10.0 : 0.0);
  return m;
}

Exec exec_of(const benchmark::State& state) { return state.range(1) == 0 ? Exec::Serial : Exec::Parallel; }

void BM_Knn(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd p = random_cloud(3, n, 1);
  const Eigen::MatrixXd q = random_cloud(3, n, 2);
  for (auto _ : state) {
    auto d = dircoord::kernels::knn_kth_distance(p, q, 5, false, exec_of(state));
    benchmark::DoNotOptimize(d.data());
  }
  state.SetLabel(state.range(1) == 0 ? "serial" : "openmp");
}
BENCHMARK(BM_Knn)->Args({1000, 0})->Args({1000, 1})->Args({5000, 0})->Args({5000, 1})->Unit(benchmark::kMillisecond);

void BM_RangeLikelihood(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd s = random_cloud(6, n, 3);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto _ : state) {
    dircoord::kernels::range_log_likelihood(s, 10.0, 0.01, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel(state.range(1) == 0 ? "serial" : "openmp");
}
BENCHMARK(BM_RangeLikelihood)->Args({100000, 0})->Args({100000, 1});

void BM_AeLikelihood(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd s = random_cloud(6, n, 4);
  std::vector<double> out(static_cast<std::size_t>(n));
  const Eigen::Matrix2d cov = 0.64 * Eigen::Matrix2d::Identity();
  for (auto _ : state) {
    dircoord::kernels::ae_log_likelihood(s, 0.3, 0.1, cov, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel(state.range(1) == 0 ? "serial" : "openmp");
}
BENCHMARK(BM_AeLikelihood)->Args({100000, 0})->Args({100000, 1});

void BM_Propagate(benchmark::State& state) {
  const auto n = state.range(0);
  Eigen::MatrixXd s = random_cloud(6, n, 5);
  const Eigen::MatrixXd noise = random_cloud(3, n, 6);
  for (auto _ : state) {
    dircoord::kernels::propagate_particles(s, Eigen::Vector3d(0.1, 0.0, -0.1), noise, 0.01, exec_of(state));
    benchmark::DoNotOptimize(s.data());
  }
  state.SetLabel(state.range(1) == 0 ? "serial" : "openmp");
}
BENCHMARK(BM_Propagate)->Args({100000, 0})->Args({100000, 1});

}  // namespace

BENCHMARK_MAIN();
