#include <benchmark/benchmark.h>

#include "ricnn/conic_conv.hpp"
#include "ricnn/config.hpp"
#include "ricnn/dft.hpp"
#include "ricnn/network.hpp"

using namespace ricnn;

namespace {

Tensor<float> random_tensor(const Shape& shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t(shape, 0.0f);
  for (auto& v : t.values()) v = static_cast<float>(rng.normal());
  return t;
}

void conv_forward(benchmark::State& state, ConvMode mode) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const int R = static_cast<int>(state.range(1));
  ConicConvSpec spec{.filters = 16, .kernel = 5, .subdivisions = R, .downsample = 1, .mode = mode};
  auto layer = ConicConvLayer<float>::zeros(spec, 8);
  layer.filters = random_tensor(layer.filters.shape(), 1);
  const RegionMap map(m, R);
  const auto a = random_tensor({m, m, 8}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conic_forward(a, layer, map));
}

void BM_ConicForward(benchmark::State& state) { conv_forward(state, ConvMode::Conic); }
void BM_StandardForward(benchmark::State& state) { conv_forward(state, ConvMode::Standard); }

void BM_ConicBackward(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  ConicConvSpec spec{.filters = 16, .kernel = 5, .subdivisions = 1, .downsample = 1};
  auto layer = ConicConvLayer<float>::zeros(spec, 8);
  layer.filters = random_tensor(layer.filters.shape(), 1);
  const RegionMap map(m, 1);
  ConicConvCache<float> cache;
  const auto out = conic_forward(random_tensor({m, m, 8}, 2), layer, map, &cache);
  const auto grad = random_tensor(out.shape(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(conic_backward(grad, layer, cache));
}

void BM_Dft2Magnitude(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto z = random_tensor({k, 4 * static_cast<std::size_t>(state.range(1))}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(dft2_magnitude(z));
}

void BM_Dft2Naive(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto z = random_tensor({k, 4 * static_cast<std::size_t>(state.range(1))}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(dft2_magnitude_naive(z));
}

void BM_ModelStep(benchmark::State& state) {
  const auto arch = static_cast<Architecture>(state.range(0));
  Model<float> model(match_parameters(default_synthetic_model(), arch));
  model.initialize(1);
  const auto x = random_tensor({51, 51, 1}, 5);
  for (auto _ : state) {
    Model<float>::Cache cache;
    const auto logits = model.forward(x, cache);
    const auto loss = cross_entropy(logits, 0);
    Tensor<float> g(logits.shape(), 0.0f);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<float>(loss.grad[i]);
    benchmark::DoNotOptimize(model.backward(g, cache));
  }
  state.SetLabel(to_string(arch));
}

}  // namespace

BENCHMARK(BM_ConicForward)->Args({25, 1})->Args({51, 1})->Args({51, 2});
BENCHMARK(BM_StandardForward)->Args({25, 1})->Args({51, 1});
BENCHMARK(BM_ConicBackward)->Arg(25)->Arg(51);
BENCHMARK(BM_Dft2Magnitude)->Args({16, 1})->Args({20, 1})->Args({64, 4});
BENCHMARK(BM_Dft2Naive)->Args({16, 1})->Args({20, 1})->Args({64, 4});
BENCHMARK(BM_ModelStep)
    ->Arg(static_cast<int>(Architecture::Cnn))
    ->Arg(static_cast<int>(Architecture::Ricnn))
    ->Arg(static_cast<int>(Architecture::Recnn))
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
