#include <benchmark/benchmark.h>

#include "nesslab/spectral.hpp"

using namespace nesslab;

namespace {

StationaryState biased_xx(int n) {
  const Model m = build_xxz_model(0.0);
  BiasSpec b;
  b.beta = 1.0;
  b.lambda = 0.5;
  return build_biased_gibbs(m.phi, m.charge, b, {n, 2, Boundary::periodic});
}

void BM_BiasedGibbs(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(biased_xx(n));
}
BENCHMARK(BM_BiasedGibbs)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_CorrelatorTables(benchmark::State& st) {
  const Model m = build_xxz_model(0.0);
  const StationaryState s = biased_xx(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(CurrentCorrelator(s, m.phi, m.charge));
}
BENCHMARK(BM_CorrelatorTables)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_CorrelationEval(benchmark::State& st) {
  const Model m = build_xxz_model(0.0);
  const StationaryState s = biased_xx(10);
  const CurrentCorrelator corr(s, m.phi, m.charge);
  const CorrelationFunction c = corr.correlation(6, 3);
  double t = 0.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(c.value(t));
    t += 1e-3;
  }
  st.counters["frequencies"] = static_cast<double>(c.freqs.size());
}
BENCHMARK(BM_CorrelationEval);

void BM_SpectralFunction(benchmark::State& st) {
  const Model m = build_xxz_model(0.0);
  const StationaryState s = biased_xx(10);
  const LocalOperator n0 = LocalOperator::on_site(0, m.charge.n0);
  const LocalOperator h = energy_density(m.phi).h;
  for (auto _ : st) benchmark::DoNotOptimize(spectral_function_rho(s, n0, h));
}
BENCHMARK(BM_SpectralFunction)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
