#include <benchmark/benchmark.h>

#include <array>
#include <vector>

#include "hieract/fusion_head.hpp"
#include "hieract/pathway.hpp"
#include "hieract/rng.hpp"

namespace {

using namespace hieract;

// Desk configuration: crop 28, C=8, D=64, T of 4/8/32 for event/set/element.
constexpr int kCrop = 28;
constexpr std::array<int, 3> kFrames{4, 8, 32};

Tensor random_clip(int frames, std::uint64_t seed) {
  Tensor clip({frames, kCrop, kCrop, 3});
  Rng rng(seed);
  for (double& v : clip.storage()) v = standard_normal(rng);
  return clip;
}

Pathway make_pathway(int level) {
  return Pathway(PathwayConfig::tiny(kFrames[level], kCrop, 8, 64), static_cast<Level>(level), 7);
}

void BM_PathwayForward(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  const Pathway pathway = make_pathway(level);
  const Tensor clip = random_clip(kFrames[level], 1);
  for (auto _ : state) benchmark::DoNotOptimize(pathway.forward(clip));
  state.SetLabel(std::string(level_name(static_cast<Level>(level))));
}
BENCHMARK(BM_PathwayForward)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_PathwayForwardBackward(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  Pathway pathway = make_pathway(level);
  const Tensor clip = random_clip(kFrames[level], 1);
  auto cache = pathway.make_cache();
  const std::vector<double> grad(64, 1e-2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pathway.forward(clip, cache.get()));
    pathway.backward(*cache, grad);
  }
  state.SetLabel(std::string(level_name(static_cast<Level>(level))));
}
BENCHMARK(BM_PathwayForwardBackward)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

// Args: 0 = desk head, 1 = full-size head.
void BM_JointHeadForward(benchmark::State& state) {
  JointHeadConfig config;
  if (state.range(0) == 0) {
    config.encoder_dims = {16, 32, 64};
    config.fusion_dim = 64;
    config.class_counts = {2, 4, 8};
    config.input_dims = {64, 64, 64};
  }
  const JointHead head(config, 3);
  Rng rng(5);
  std::array<std::vector<double>, 3> features;
  for (int l = 0; l < 3; ++l) {
    features[l].resize(config.input_dims[l]);
    for (double& v : features[l]) v = standard_normal(rng);
  }
  const std::array<std::span<const double>, 3> views{features[0], features[1], features[2]};
  for (auto _ : state) benchmark::DoNotOptimize(head.forward(views));
}
BENCHMARK(BM_JointHeadForward)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
