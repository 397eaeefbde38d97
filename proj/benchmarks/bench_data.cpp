#include <benchmark/benchmark.h>

#include "hieract/sampling.hpp"
#include "hieract/synthetic.hpp"

namespace {

using namespace hieract;

void BM_PlanIndicesTrain(benchmark::State& state) {
  const SamplingSpec spec{32, 2, 224, Level::kElement};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(plan_indices(300, spec, ClipSelection::train_random(), ++seed));
}
BENCHMARK(BM_PlanIndicesTrain);

void BM_PlanIndicesMulti(benchmark::State& state) {
  const SamplingSpec spec{4, 16, 224, Level::kEvent};
  const auto k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(plan_indices(300, spec, ClipSelection::test_multi(k), 0));
}
BENCHMARK(BM_PlanIndicesMulti)->Arg(1)->Arg(10);

void BM_RenderClip(benchmark::State& state) {
  SynthSpec spec;
  spec.frames_per_clip = static_cast<int>(state.range(0));
  int clip = 0;
  for (auto _ : state) benchmark::DoNotOptimize(render_clip(spec, {1, 2, 5}, clip++));
  state.SetItemsProcessed(state.iterations() * spec.frames_per_clip);
}
BENCHMARK(BM_RenderClip)->Arg(80)->Unit(benchmark::kMicrosecond);

// Args: frames, crop, rescale target.
void BM_CropAndScale(benchmark::State& state) {
  SynthSpec spec;
  spec.frames_per_clip = static_cast<int>(state.range(0));
  const auto frames = render_clip(spec, {0, 0, 0}, 0);
  PreprocessConfig preprocess;
  preprocess.scale = static_cast<int>(state.range(2));
  const int crop = static_cast<int>(state.range(1));
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(crop_and_scale(frames, crop, preprocess, CropMode::kRandom, ++seed));
  state.SetItemsProcessed(state.iterations() * spec.frames_per_clip);
}
BENCHMARK(BM_CropAndScale)->Args({32, 28, 32})->Args({32, 112, 128})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
