#include <benchmark/benchmark.h>

#include "strongreg/evaluation.hpp"
#include "strongreg/gaussian.hpp"
#include "strongreg/gmm.hpp"
#include "strongreg/solvers.hpp"
#include "strongreg/theory.hpp"

using namespace strongreg;

namespace {

const Dataset& default_dataset() {
  static const Dataset ds = generate_dataset(GmmConfig{});
  return ds;
}

void BM_TrainAll(benchmark::State& state) {
  const auto kind = static_cast<RegKind>(state.range(0));
  const double lambda = kind == RegKind::L1 ? 50.0 : 1e3;
  const Dataset& ds = default_dataset();
  for (auto _ : state) benchmark::DoNotOptimize(train_all(ds, {kind, lambda}).W.data());
  state.SetLabel(to_string(kind));
}

void BM_BivariateExpect(benchmark::State& state) {
  const double b = 0.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bivariate_gauss_expect([](double g, double h) { return (g - h) * (g - h); },
                                                    {{-b, b}, {-b, b}}, 0.6));
  }
}

void BM_LassoDelta(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(lasso_delta(2.0, 0.7, 1.5));
}

void BM_QkEstimatorBuild(benchmark::State& state) {
  for (auto _ : state) {
    RngStream rng(1, 0);
    QkEstimator est(5, state.range(0), rng);
    benchmark::DoNotOptimize(est(1.0).value);
  }
}

void BM_Prediction(benchmark::State& state) {
  const auto kind = static_cast<RegKind>(state.range(0));
  const GmmConfig cfg;
  const QkEstimator& qk = default_qk(cfg.k);
  for (auto _ : state) benchmark::DoNotOptimize(predict(cfg, {kind, 50.0}, qk).error);
  state.SetLabel(to_string(kind));
}

}  // namespace

BENCHMARK(BM_TrainAll)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BivariateExpect);
BENCHMARK(BM_LassoDelta);
BENCHMARK(BM_QkEstimatorBuild)->Arg(20000)->Arg(200000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Prediction)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
