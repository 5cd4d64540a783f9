#include <benchmark/benchmark.h>

#include "hatk/block_analysis.hpp"

namespace {

using hatk::PatternKind;
using hatk::PatternSpec;

PatternSpec spec_for(int which) {
  switch (which) {
    case 0: return PatternSpec::windowed(PatternKind::WSA, {128, 128}, {16, 16});
    case 1: return PatternSpec::windowed(PatternKind::HWA, {128, 128}, {16, 16});
    case 2: return PatternSpec::kernelled(PatternKind::NA2D, {128, 128}, {17, 17});
    default: return PatternSpec::banded(PatternKind::HNA, {128, 128}, {17, 17});
  }
}

void BM_Classify(benchmark::State& state) {
  const hatk::Pattern pattern(spec_for(static_cast<int>(state.range(0))));
  const auto method = state.range(1) == 0 ? hatk::ClassifyMethod::Intervals : hatk::ClassifyMethod::Predicate;
  state.SetLabel(pattern.spec().describe());
  for (auto _ : state) {
    auto g = hatk::classify(pattern, {128, 128}, {method, 1});
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_Classify)
    ->ArgsProduct({{0, 1, 2, 3}, {0, 1}})
    ->ArgNames({"pattern", "predicate"})
    ->Unit(benchmark::kMillisecond);

void BM_ClassifyThreads(benchmark::State& state) {
  const hatk::Pattern pattern(spec_for(2));
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto g = hatk::classify(pattern, {128, 128}, {hatk::ClassifyMethod::Intervals, threads});
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_ClassifyThreads)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
