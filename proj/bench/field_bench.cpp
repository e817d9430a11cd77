// Field kernel throughput: chunked OpenMP kernel vs serial reference, and the
// materialised chunked_sum.

#include <benchmark/benchmark.h>

#include <vector>

#include "sedsim/field.hpp"
#include "sedsim/reduction.hpp"

namespace {

using namespace sedsim;

const FieldRealization& realization(std::size_t modes) {
  static std::vector<std::pair<std::size_t, FieldRealization>> cache;
  for (auto& [m, f] : cache) {
    if (m == modes) return f;
  }
  cache.emplace_back(modes, FieldRealization::build(7, FrequencyGrid{10000, modes}, 5.3e-5));
  return cache.back().second;
}

void BM_KernelChunked(benchmark::State& state) {
  const FieldRealization& f = realization(static_cast<std::size_t>(state.range(0)));
  double t = 0.25;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_fields(f, f.all_modes(), t, kFieldA | kFieldC));
    t += 1e-3;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_KernelSerial(benchmark::State& state) {
  const FieldRealization& f = realization(static_cast<std::size_t>(state.range(0)));
  double t = 0.25;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_fields_serial(f, f.all_modes(), t, kFieldA | kFieldC));
    t += 1e-3;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ChunkedSum(benchmark::State& state) {
  const FieldRealization& f = realization(static_cast<std::size_t>(state.range(0)));
  const std::vector<Vec3> terms = field_terms(f, f.all_modes(), 0.25, kFieldE);
  for (auto _ : state) benchmark::DoNotOptimize(chunked_sum(terms));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_KernelChunked)->Arg(1 << 14)->Arg(1 << 17)->Arg(1 << 20);
BENCHMARK(BM_KernelSerial)->Arg(1 << 14)->Arg(1 << 17)->Arg(1 << 20);
BENCHMARK(BM_ChunkedSum)->Arg(1 << 14)->Arg(1 << 17)->Arg(1 << 20);

}  // namespace

BENCHMARK_MAIN();
