#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "refprior/kernels.hpp"

using namespace refprior;
using kernels::Exec;

namespace {

Matrix positive(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> n(0.0, 0.7);
  Matrix m(rows, cols);
  for (auto& x : m.data()) x = std::exp(n(g));
  return m;
}

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::parallel : Exec::serial; }

void BM_NearestByKld(benchmark::State& state) {
  const auto m = LikelihoodModel::gaussian_scale(5);
  const auto theta = positive(state.range(0), 5, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::nearest_by_kld(m, theta, exec_of(state)));
}

void BM_ArgmaxLikelihood(benchmark::State& state) {
  const auto m = LikelihoodModel::gaussian_scale(5);
  const auto theta = positive(state.range(0), 5, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::argmax_likelihood(m, theta, 1, 7, exec_of(state)));
}

void BM_KldTerms(benchmark::State& state) {
  const auto m = LikelihoodModel::gaussian_scale(5);
  const auto theta = positive(state.range(0), 5, 3);
  std::vector<std::size_t> sel(theta.rows());
  for (std::size_t i = 0; i < sel.size(); ++i) sel[i] = (i + 1) % sel.size();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kld_terms(m, theta, sel, exec_of(state)));
}

void BM_GradLogF(benchmark::State& state) {
  const auto m = LikelihoodModel::poisson();
  const auto particles = positive(state.range(0), 1, 4);
  const auto samples = positive(state.range(0), 1, 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::grad_log_f_all(m, particles, samples, 1, exec_of(state)));
}

void BM_SteinDirection(benchmark::State& state) {
  const Kernel k{KernelKind::rbf, 0.5};
  const auto x = positive(state.range(0), 2, 6);
  const auto g = positive(state.range(0), 2, 7);
  const Matrix jac(x.rows(), x.cols(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::stein_direction(k, x, g, jac, exec_of(state)));
}

void BM_BergerGrid(benchmark::State& state) {
  const auto m = LikelihoodModel::bernoulli();
  BergerConfig cfg;
  cfg.grid_size = state.range(0);
  const auto grid = cell_centres(cfg.bounds, cfg.grid_size);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::berger_log_prior_grid(m, grid, cfg, 11, exec_of(state)));
}

}  // namespace

// second argument: 0 serial reference, 1 OpenMP
BENCHMARK(BM_NearestByKld)->ArgsProduct({{100, 1000}, {0, 1}});
BENCHMARK(BM_ArgmaxLikelihood)->ArgsProduct({{100, 1000}, {0, 1}});
BENCHMARK(BM_KldTerms)->ArgsProduct({{1000, 100000}, {0, 1}});
BENCHMARK(BM_GradLogF)->ArgsProduct({{50, 500}, {0, 1}});
BENCHMARK(BM_SteinDirection)->ArgsProduct({{50, 500}, {0, 1}});
BENCHMARK(BM_BergerGrid)->ArgsProduct({{100}, {0, 1}});

BENCHMARK_MAIN();
