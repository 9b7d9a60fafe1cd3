#include <benchmark/benchmark.h>

#include "fks/analysis.hpp"
#include "fks/inequality.hpp"
#include "fks/integrator.hpp"
#include "fks/operators.hpp"

namespace {

fks::Field bump(std::size_t n) {
  const auto g = fks::make_grid(n, 20.0);
  return fks::synthesize_initial({fks::Family::gaussian, 2.0, 1.0, 0.0}, g);
}

void BM_transform_roundtrip(benchmark::State& st) {
  const auto f = bump(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(fks::inverse_transform(fks::transform(f)));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_transform_roundtrip)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oNLogN);

void BM_frac_laplacian_spectral(benchmark::State& st) {
  const auto f = bump(static_cast<std::size_t>(st.range(0)));
  const fks::FractionalExponent a(0.5);
  for (auto _ : st) benchmark::DoNotOptimize(fks::frac_laplacian_spectral(f, a));
}
BENCHMARK(BM_frac_laplacian_spectral)->Arg(2048)->Arg(16384);

void BM_frac_laplacian_quadrature(benchmark::State& st) {
  const auto f = bump(static_cast<std::size_t>(st.range(0)));
  const fks::FractionalExponent a(0.5);
  const auto q = fks::make_quadrature_scheme(f.grid, a);
  for (auto _ : st) benchmark::DoNotOptimize(fks::frac_laplacian_quadrature(f, a, q));
}
BENCHMARK(BM_frac_laplacian_quadrature)->Arg(512)->Arg(2048);

void BM_heun_step(benchmark::State& st) {
  fks::SimState s{fks::Frame::physical, 0.0, bump(static_cast<std::size_t>(st.range(0))), fks::FractionalExponent(0.5),
                  1.0};
  for (auto _ : st) benchmark::DoNotOptimize(fks::step(s, 1e-4));
}
BENCHMARK(BM_heun_step)->Arg(2048)->Arg(16384);

void BM_gns_ratio(benchmark::State& st) {
  const auto g = fks::default_gns_grid();
  const auto f = fks::synthesize_initial({fks::Family::gaussian, 1.0, 1.0, 0.0}, g);
  for (auto _ : st) benchmark::DoNotOptimize(fks::gns_ratio(f, 2.0, 1.0));
}
BENCHMARK(BM_gns_ratio);

void BM_build_test_function(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(fks::build_test_function(0.5, 0.75));
}
BENCHMARK(BM_build_test_function)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
