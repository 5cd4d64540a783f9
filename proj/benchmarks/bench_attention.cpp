#include <benchmark/benchmark.h>

#include <random>

#include "hatk/attention.hpp"

namespace {

using hatk::PatternKind;
using hatk::PatternSpec;

// Forward pass over a 32x32 grid; the pair count shows how much work the
// skipped tiles save.
void BM_SparseForward(benchmark::State& state) {
  const auto kind = static_cast<PatternKind>(state.range(0));
  const hatk::GridShape g{32, 32};
  PatternSpec spec;
  switch (kind) {
    case PatternKind::WSA:
    case PatternKind::HWA:
    case PatternKind::HSWA: spec = PatternSpec::windowed(kind, g, {8, 8}); break;
    case PatternKind::SA:
    case PatternKind::NA2D: spec = PatternSpec::kernelled(kind, g, {7, 7}); break;
    default: spec = PatternSpec::banded(kind, g, {7, 7}); break;
  }
  const hatk::Pattern pattern(spec);
  const auto grid = hatk::classify(pattern, {64, 64});
  std::mt19937_64 rng(1);
  const hatk::Shape4 s{1, 2, spec.tokens(), 32};
  const auto t = hatk::AttnTensors<float>::make(hatk::random_tensor<float>(s, rng),
                                                hatk::random_tensor<float>(s, rng),
                                                hatk::random_tensor<float>(s, rng));
  std::size_t pairs = 0;
  for (auto _ : state) {
    auto r = hatk::sparse_forward(t, grid, pattern, hatk::ScoreMod::none());
    pairs = r.stats.pairs_evaluated;
    benchmark::DoNotOptimize(r);
  }
  state.SetLabel(spec.describe());
  state.counters["tiles"] = static_cast<double>(grid.nonempty());
  state.counters["pairs"] = static_cast<double>(pairs);
}
BENCHMARK(BM_SparseForward)->DenseRange(0, 6)->Unit(benchmark::kMillisecond);

void BM_DenseForward(benchmark::State& state) {
  const hatk::Pattern pattern(PatternSpec::windowed(PatternKind::HWA, {32, 32}, {8, 8}));
  const auto mask = hatk::materialize_mask(pattern);
  std::mt19937_64 rng(1);
  const hatk::Shape4 s{1, 2, pattern.tokens(), 32};
  const auto t = hatk::AttnTensors<float>::make(hatk::random_tensor<float>(s, rng),
                                                hatk::random_tensor<float>(s, rng),
                                                hatk::random_tensor<float>(s, rng));
  for (auto _ : state) {
    auto out = hatk::dense_forward(t, mask, hatk::ScoreMod::none());
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_DenseForward)->Unit(benchmark::kMillisecond);

}  // namespace
