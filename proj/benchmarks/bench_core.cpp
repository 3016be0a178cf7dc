#include <benchmark/benchmark.h>

#include "identlab/estimators.hpp"
#include "identlab/gaussian.hpp"
#include "identlab/kmeans.hpp"
#include "identlab/models.hpp"
#include "identlab/rng.hpp"

using namespace identlab;

static void BM_Cholesky(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const MvNormal d = equicorr_mvn({.n = n, .mu = 0, .sigma2 = 1, .rho = 0.5});
  for (auto _ : state) benchmark::DoNotOptimize(cholesky(d.cov));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Cholesky)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oNCubed);

static void BM_ConditionalSchur(benchmark::State& state) {
  const EquicorrSpec spec{.n = static_cast<std::size_t>(state.range(0)), .mu = 0, .sigma2 = 1, .rho = 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(conditional_given_mean_schur(spec, 0.7));
}
BENCHMARK(BM_ConditionalSchur)->Arg(25)->Arg(200);

static void BM_SampleM1(benchmark::State& state) {
  const EquicorrSpec spec{.n = static_cast<std::size_t>(state.range(0)), .mu = 0, .sigma2 = 1, .rho = 0.5};
  Rng rng = Stream(1).engine();
  for (auto _ : state) benchmark::DoNotOptimize(sample_m1(spec, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleM1)->Arg(10)->Arg(10000);

static void BM_ScanStatistic(benchmark::State& state) {
  Rng rng = Stream(2).engine();
  const BitVector x = sample_binary({.variant = BinaryVariant::M3, .p = 0.5}, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(scan_statistic(x));
}
BENCHMARK(BM_ScanStatistic)->Arg(200)->Arg(2000);

static void BM_Lloyd(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Rng rng = Stream(3).engine();
  Eigen::MatrixXd data(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    data(i, 0) = draw_normal(rng) + (i % 2 ? 2.0 : -2.0);
    data(i, 1) = draw_normal(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(lloyd(data, 2, {.restarts = 4}, rng));
}
BENCHMARK(BM_Lloyd)->Arg(1000)->Arg(5000);

static void BM_BruteForce(benchmark::State& state) {
  Rng rng = Stream(4).engine();
  Eigen::MatrixXd data(10, 2);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = draw_normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_kmeans(data, 3));
}
BENCHMARK(BM_BruteForce);

BENCHMARK_MAIN();
