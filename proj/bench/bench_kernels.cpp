// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "hsprior/dataset.hpp"
#include "hsprior/inference.hpp"
#include "hsprior/prior_design.hpp"

namespace {

using namespace hsprior;

void BM_SampleMeff(benchmark::State& state, Execution exec) {
  const PriorConfig prior =
      make_prior_config(5.0, DesignScale{200, 1000, 1.0}, HyperpriorFamily::half_cauchy);
  const long draws = state.range(0);
  for (auto _ : state) {
    auto sample = sample_meff_prior(prior, draws, 1, exec);
    benchmark::DoNotOptimize(sample.draws.data());
  }
  state.SetItemsProcessed(state.iterations() * draws);
}

void BM_FitChains(benchmark::State& state, Execution exec) {
  const SyntheticProblem problem = generate_linear(50, 20, 3, 2.0, 1.0, 7);
  const Dataset data = standardize(problem.data);
  ModelSpec spec;
  spec.prior = make_prior_config(3.0, DesignScale{50, 20, 1.0}, HyperpriorFamily::half_cauchy,
                                 std::nullopt, true);
  SamplerSettings settings;
  settings.chains = static_cast<int>(state.range(0));
  settings.iterations = 200;
  settings.seed = 3;
  for (auto _ : state) {
    auto result = fit(spec, data, settings, exec);
    benchmark::DoNotOptimize(result.max_rhat);
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_SampleMeff, serial, Execution::serial)->Arg(1 << 16)->Arg(1 << 19);
BENCHMARK_CAPTURE(BM_SampleMeff, openmp, Execution::parallel)->Arg(1 << 16)->Arg(1 << 19);
BENCHMARK_CAPTURE(BM_FitChains, serial, Execution::serial)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FitChains, openmp, Execution::parallel)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
