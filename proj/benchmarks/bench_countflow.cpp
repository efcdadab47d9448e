#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "countflow/copula.hpp"
#include "countflow/inference.hpp"
#include "countflow/lgc.hpp"
#include "countflow/model.hpp"
#include "countflow/rng.hpp"
#include "countflow/simulate.hpp"
#include "countflow/stationarity.hpp"

namespace {

using namespace countflow;

ModelParams bench_params(Eigen::Index p) {
  ModelParams params;
  params.kind = ModelKind::Linear;
  params.d = Eigen::VectorXd::Constant(p, 1.0);
  params.A = Eigen::MatrixXd::Identity(p, p) * 0.3;
  params.B = Eigen::MatrixXd::Identity(p, p) * 0.4;
  return params;
}

CountSeries bench_series(Eigen::Index n) {
  ModelParams params = bench_params(2);
  SimulationConfig cfg;
  cfg.n = n;
  cfg.seed = 99;
  return simulate_path(params, {CopulaFamily::Gaussian, 0.4}, cfg).counts;
}

void bm_mean_update(benchmark::State& state) {
  const ModelParams params = bench_params(5);
  Eigen::VectorXd lambda = params.d;
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 2.0);
  for (auto _ : state) {
    lambda = mean_update(params, lambda, y);
    benchmark::DoNotOptimize(lambda.data());
  }
}
BENCHMARK(bm_mean_update);

void bm_copula_draw(benchmark::State& state, CopulaFamily family, double phi) {
  Eigen::VectorXd lambda(5);
  lambda << 0.5, 1.0, 2.0, 5.0, 10.0;
  Xoshiro256pp rng(7);
  const CopulaSpec spec{family, phi};
  for (auto _ : state) {
    auto y = copula_poisson_draw(spec, lambda, rng);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK_CAPTURE(bm_copula_draw, independence, CopulaFamily::Independence, 0.0);
BENCHMARK_CAPTURE(bm_copula_draw, gaussian, CopulaFamily::Gaussian, 0.5);
BENCHMARK_CAPTURE(bm_copula_draw, clayton, CopulaFamily::Clayton, 2.0);

void bm_quasi_loglik(benchmark::State& state) {
  const CountSeries y = bench_series(1000);
  const ModelParams params = bench_params(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quasi_loglik(params, y));
  }
}
BENCHMARK(bm_quasi_loglik);

void bm_score(benchmark::State& state) {
  const CountSeries y = bench_series(1000);
  const ModelParams params = bench_params(2);
  for (auto _ : state) {
    auto s = score(params, y);
    benchmark::DoNotOptimize(s.data());
  }
}
BENCHMARK(bm_score);

void bm_operator_norm(benchmark::State& state) {
  const Eigen::Index p = state.range(0);
  Xoshiro256pp rng(3);
  Eigen::MatrixXd m(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = rng.uniform() / static_cast<double>(p);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(operator_norm(m, MatrixNorm::Two));
  }
}
BENCHMARK(bm_operator_norm)->Arg(10)->Arg(50)->Arg(100);

void bm_local_gaussian_fit(benchmark::State& state) {
  Xoshiro256pp rng(11);
  const int n = 500;
  Eigen::MatrixXd data(n, 2);
  for (int i = 0; i < n; ++i) {
    const double z1 = rng.normal();
    const double z2 = 0.5 * z1 + std::sqrt(0.75) * rng.normal();
    data(i, 0) = z1;
    data(i, 1) = z2;
  }
  const Eigen::Vector2d x(0.5, 0.5);
  const Eigen::Vector2d bw(0.8, 0.8);
  for (auto _ : state) {
    auto fit = local_gaussian_fit(data, x, bw);
    benchmark::DoNotOptimize(&fit);
  }
}
BENCHMARK(bm_local_gaussian_fit);

}  // namespace

BENCHMARK_MAIN();
