#include <benchmark/benchmark.h>

#include "cbp/fit.hpp"
#include "cbp/likelihood.hpp"
#include "cbp/simulate.hpp"
#include "cbp/tvd.hpp"

namespace {

using namespace cbp;

const OffspringSpec kModelOne = OffspringSpec::finite({0.1538, 0.6491, 0.1971});

void BM_ConvolvePower(benchmark::State& state) {
  const Pmf xi = offspring_pmf(kModelOne);
  for (auto _ : state) benchmark::DoNotOptimize(convolve_power(xi, state.range(0)));
}
BENCHMARK(BM_ConvolvePower)->RangeMultiplier(4)->Range(16, 4096);

void BM_TransitionExact(benchmark::State& state) {
  const CbpModel m{OffspringSpec::poisson(1.0), ControlSpec::poisson_linear(1.05), 1, ""};
  for (auto _ : state) benchmark::DoNotOptimize(transition_pmf(m, state.range(0), TransitionMethod::exact()));
}
BENCHMARK(BM_TransitionExact)->RangeMultiplier(4)->Range(16, 1024);

void BM_TransitionPgf(benchmark::State& state) {
  const CbpModel m{OffspringSpec::poisson(1.0), ControlSpec::poisson_linear(1.05), 1, ""};
  for (auto _ : state) benchmark::DoNotOptimize(transition_pmf(m, state.range(0), TransitionMethod::pgf()));
}
BENCHMARK(BM_TransitionPgf)->RangeMultiplier(4)->Range(16, 256);

void BM_SimulateTrajectory(benchmark::State& state) {
  const CbpModel m{kModelOne, ControlSpec::identity(), 10, ""};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_trajectory(m, state.range(0), seed++));
}
BENCHMARK(BM_SimulateTrajectory)->Arg(70)->Arg(300);

void BM_LogLikelihoodModelOne(benchmark::State& state) {
  const CbpModel m{kModelOne, ControlSpec::identity(), 10, ""};
  const Trajectory t = simulate_trajectory(m, 70, 1941);
  for (auto _ : state) benchmark::DoNotOptimize(log_likelihood(m, t));
}
BENCHMARK(BM_LogLikelihoodModelOne);

void BM_FitModelOne(benchmark::State& state) {
  const auto fam = ParametricFamily::finite_simplex(2, 10);
  const Trajectory t = simulate_trajectory(fam.model(std::vector<double>{0.1538, 0.6491, 0.1971}), 70, 1941);
  FitOptions options;
  options.starts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_mle(fam, t, TransitionMethod::exact(), options));
}
BENCHMARK(BM_FitModelOne)->Unit(benchmark::kMillisecond);

void BM_OneStepTvd(benchmark::State& state) {
  const CbpModel a = make_bgwp(OffspringSpec::poisson(2.0), 1);
  const CbpModel b = make_bgwp(OffspringSpec::finite({0.2, 0.2, 0.2, 0.2, 0.2}), 1);
  for (auto _ : state) benchmark::DoNotOptimize(one_step_tvd(a, b, state.range(0)));
}
BENCHMARK(BM_OneStepTvd)->RangeMultiplier(4)->Range(16, 1024);

void BM_SteinBound(benchmark::State& state) {
  const Pmf u = offspring_pmf(OffspringSpec::finite({0.2, 0.2, 0.2, 0.2, 0.2}));
  for (auto _ : state) benchmark::DoNotOptimize(stein_dn_bound(u, state.range(0)));
}
BENCHMARK(BM_SteinBound)->Arg(64)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
