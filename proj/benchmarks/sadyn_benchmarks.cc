#include <benchmark/benchmark.h>

#include "sadyn/bounds.hpp"
#include "sadyn/init.hpp"
#include "sadyn/jacobian.hpp"
#include "sadyn/lyapunov.hpp"

namespace sadyn {
namespace {

struct Fixture {
  MSAWeights w;
  TokenMatrix x;
  StepConfig cfg;

  Fixture(Index s, Index d, Index h) {
    Rng rng(42);
    w = gaussian_msa_weights(d, h, d / h, 1.0 / std::sqrt(double(d)),
                             1.0 / std::sqrt(double(d / h)), rng);
    x = random_unit_tokens(s, d, rng);
    cfg.norm = NormParams::unit(d);
  }
};

void BM_JacMsa(benchmark::State& state) {
  const Fixture f(state.range(0), 32, 4);
  for (auto _ : state) benchmark::DoNotOptimize(jac_msa(f.x, f.w));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_JacMsa)->RangeMultiplier(2)->Range(4, 32)->Complexity();

void BM_JacItrsaStep(benchmark::State& state) {
  const Fixture f(state.range(0), 32, 4);
  for (auto _ : state) benchmark::DoNotOptimize(jac_itrsa_step(f.x, f.w, f.cfg));
}
BENCHMARK(BM_JacItrsaStep)->RangeMultiplier(2)->Range(4, 32);

void BM_FdJacobianMsa(benchmark::State& state) {
  const Fixture f(state.range(0), 32, 4);
  const StateMap map = [&](const TokenMatrix& z) { return msa(z, f.w); };
  for (auto _ : state) benchmark::DoNotOptimize(fd_jacobian(map, f.x));
}
BENCHMARK(BM_FdJacobianMsa)->RangeMultiplier(2)->Range(4, 16);

void BM_SpectralNorm(benchmark::State& state) {
  const Fixture f(state.range(0), 32, 4);
  const Matrix j = jac_itrsa_step(f.x, f.w, f.cfg).data;
  for (auto _ : state) benchmark::DoNotOptimize(spectral_norm(j));
}
BENCHMARK(BM_SpectralNorm)->RangeMultiplier(2)->Range(4, 32);

void BM_LyapunovSpectrum(benchmark::State& state) {
  const Fixture f(8, 32, 4);
  const TangentMap map = TangentMap::itrsa(f.w, f.cfg, 8);
  const Vector x0 = vec(f.x);
  const auto basis = static_cast<Index>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov_spectrum(map, x0, kDefaultHorizon, basis));
}
BENCHMARK(BM_LyapunovSpectrum)->Arg(8)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MeasureProp3(benchmark::State& state) {
  const Fixture f(8, 32, 4);
  TokenMatrix x = f.x * 5.0;
  for (auto _ : state) benchmark::DoNotOptimize(measure_prop3(x, f.w, f.cfg));
}
BENCHMARK(BM_MeasureProp3)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace sadyn

BENCHMARK_MAIN();
