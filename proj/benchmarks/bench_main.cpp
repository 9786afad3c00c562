#include <benchmark/benchmark.h>

#include <map>

#include "rwpi/dro.hpp"
#include "rwpi/limit_laws.hpp"
#include "rwpi/pipeline.hpp"
#include "rwpi/solvers.hpp"

using namespace rwpi;

namespace {

const Dataset& sim_data(std::size_t n, std::size_t d) {
  static std::map<std::pair<std::size_t, std::size_t>, Dataset> cache;
  const auto key = std::make_pair(n, d);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, standardize(pipeline::generate_linear_data(n, d, 10.0, RngSeed{1}).data)).first;
  }
  return it->second;
}

void BM_SqrtLassoL1(benchmark::State& state) {
  const auto& ds = sim_data(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(solvers::fit_sqrt_lasso(ds, 0.2, solvers::PenaltyNorm::l1));
}
BENCHMARK(BM_SqrtLassoL1)->Args({350, 50})->Args({3500, 100})->Unit(benchmark::kMillisecond);

void BM_SqrtLassoL2(benchmark::State& state) {
  const auto& ds = sim_data(350, 50);
  for (auto _ : state) benchmark::DoNotOptimize(solvers::fit_sqrt_lasso(ds, 0.2, solvers::PenaltyNorm::l2));
}
BENCHMARK(BM_SqrtLassoL2)->Unit(benchmark::kMillisecond);

void BM_SampleL2(benchmark::State& state) {
  const auto f = limits::CovarianceFactor::autoregressive(state.range(0), 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        limits::sample_l2(f, Exponent::infinity(), limits::normal_error_factor(), 1000, RngSeed{2}));
  }
}
BENCHMARK(BM_SampleL2)->Arg(50)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_L1Draw(benchmark::State& state) {
  const auto& ds = sim_data(static_cast<std::size_t>(state.range(0)), 10);
  const Vector beta = solvers::fit_sqrt_lasso(ds, 0.1, solvers::PenaltyNorm::l1).beta;
  const Vector e = ds.y() - ds.x() * beta;
  const auto f = limits::CovarianceFactor::from_covariance(sample_covariance(ds.x()));
  auto gen = RngSeed{3}.stream(0);
  const Vector z = f.draw(gen);
  const double sigma = std::sqrt(e.squaredNorm() / static_cast<double>(e.size()));
  for (auto _ : state) {
    benchmark::DoNotOptimize(limits::l1_value(sigma, beta, ds.x(), e, z, Exponent::finite(1.0)));
  }
}
BENCHMARK(BM_L1Draw)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_DualNumeric(benchmark::State& state) {
  const auto& ds = sim_data(350, 50);
  const Vector beta = Vector::Constant(50, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dro::worstcase_dual_numeric(ds, beta, 0.3, Exponent::finite(1.0)));
  }
}
BENCHMARK(BM_DualNumeric)->Unit(benchmark::kMicrosecond);

void BM_CrossValidate(benchmark::State& state) {
  const auto& ds = sim_data(350, 50);
  const auto grid = solvers::log_grid(solvers::sqrt_lasso_zero_threshold(ds, solvers::PenaltyNorm::l1), 50);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solvers::cross_validate_lambda(ds, grid, solvers::CvObjective::sqrt_lasso, RngSeed{4}));
  }
}
BENCHMARK(BM_CrossValidate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
