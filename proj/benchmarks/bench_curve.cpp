#include <benchmark/benchmark.h>

#include "hatk/grid_curve.hpp"

namespace {

void BM_HilbertOrder(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) {
    auto m = hatk::hilbert_order({side, side});
    benchmark::DoNotOptimize(m);
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_HilbertOrder)->Arg(56)->Arg(96)->Arg(128)->Arg(256);

void BM_HilbertOrderRect(benchmark::State& state) {
  for (auto _ : state) {
    auto m = hatk::hilbert_order({128, 256});
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(BM_HilbertOrderRect);

// Lookup through the shared cache after the first call.
void BM_CachedMapping(benchmark::State& state) {
  hatk::cached_mapping({96, 96}, hatk::Ordering::Hilbert);
  for (auto _ : state) benchmark::DoNotOptimize(hatk::cached_mapping({96, 96}, hatk::Ordering::Hilbert));
}
BENCHMARK(BM_CachedMapping);

}  // namespace
