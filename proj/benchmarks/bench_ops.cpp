#include <benchmark/benchmark.h>

#include "hieract/ops.hpp"
#include "hieract/rng.hpp"

namespace {

using namespace hieract;

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.storage()) v = standard_normal(rng);
  return t;
}

// Args: channels in, channels out, frames, spatial size, kernel (t, s).
ops::Conv3dGeometry geometry(const benchmark::State& state) {
  const int kt = static_cast<int>(state.range(4)), ks = static_cast<int>(state.range(5));
  return {static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), {kt, ks, ks}, {1, 1, 1},
          {kt / 2, ks / 2, ks / 2}};
}

void BM_Conv3dForward(benchmark::State& state) {
  const auto g = geometry(state);
  const Tensor x = random_tensor({g.in_channels, state.range(2), state.range(3), state.range(3)}, 1);
  const Tensor w = random_tensor({g.out_channels, g.in_channels, g.kernel[0], g.kernel[1], g.kernel[2]}, 2);
  const Tensor b = random_tensor({g.out_channels}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(ops::conv3d_forward(x, w, b, g, nullptr));
  const double macs = static_cast<double>(g.out_channels) * g.patch_size() * state.range(2) * state.range(3) * state.range(3);
  state.counters["GFLOP/s"] = benchmark::Counter(2 * macs, benchmark::Counter::kIsIterationInvariantRate,
                                                 benchmark::Counter::kIs1000);
}

void BM_Conv3dBackward(benchmark::State& state) {
  const auto g = geometry(state);
  const Tensor x = random_tensor({g.in_channels, state.range(2), state.range(3), state.range(3)}, 1);
  const Tensor w = random_tensor({g.out_channels, g.in_channels, g.kernel[0], g.kernel[1], g.kernel[2]}, 2);
  const Tensor b = random_tensor({g.out_channels}, 3);
  ops::Conv3dCache cache;
  const Tensor y = ops::conv3d_forward(x, w, b, g, &cache);
  const Tensor dy = random_tensor(y.shape(), 4);
  Tensor dw(w.shape()), db(b.shape());
  for (auto _ : state) benchmark::DoNotOptimize(ops::conv3d_backward(dy, w, g, cache, dw, db));
}

// Roughly the desk layer sizes (28-px stem input, then 14 and 7 px), all at stride 1.
#define CONV_SHAPES                 \
  Args({3, 8, 4, 28, 1, 7})         \
      ->Args({3, 8, 32, 28, 1, 7})  \
      ->Args({8, 8, 32, 14, 3, 3})  \
      ->Args({16, 16, 32, 7, 3, 3}) \
      ->Unit(benchmark::kMicrosecond)

BENCHMARK(BM_Conv3dForward)->CONV_SHAPES;
BENCHMARK(BM_Conv3dBackward)->CONV_SHAPES;

void BM_MaxPool(benchmark::State& state) {
  const Tensor x = random_tensor({8, 32, 14, 14}, 5);
  const ops::MaxPool3dGeometry g;
  for (auto _ : state) benchmark::DoNotOptimize(ops::maxpool3d_forward(x, g, nullptr));
}
BENCHMARK(BM_MaxPool)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
