// OpenMP kernels vs the serial baseline on Tiny VGG-sized layers.

#include <benchmark/benchmark.h>

#include "cnnscope/engine.hpp"
#include "cnnscope/model_io.hpp"

using namespace cnnscope;

namespace {

const ModelBundle& fixture() {
  static const ModelBundle model = make_fixture_model(42, tiny_vgg_descriptor());
  return model;
}

const Tensor3& sample() {
  static const Tensor3 img = make_sample_image(0, {64, 64, 3});
  return img;
}

// Input of Tiny VGG layer `index` for the sample image.
const Tensor3& layer_input(std::size_t index) {
  static const InferenceSession s =
      run_forward(std::make_shared<const ModelBundle>(fixture()), sample());
  return s.layer_input(index);
}

template <ExecutionMode Mode>
void BM_Layer(benchmark::State& state) {
  const auto index = static_cast<std::size_t>(state.range(0));
  const auto& layer = fixture().descriptor.layers[index];
  const auto& params = fixture().weights.layers[index];
  const Tensor3& in = layer_input(index);
  for (auto _ : state) benchmark::DoNotOptimize(apply_layer(layer, params, in, Mode));
  state.SetLabel(layer.name);
}

template <ExecutionMode Mode>
void BM_Forward(benchmark::State& state) {
  auto model = std::make_shared<const ModelBundle>(fixture());
  for (auto _ : state) benchmark::DoNotOptimize(run_forward(model, sample(), {Mode, nullptr}));
}

// conv_1_1, conv_1_2, max_pool_1, conv_2_2, output
#define LAYER_ARGS Arg(0)->Arg(2)->Arg(4)->Arg(7)->Arg(11)

BENCHMARK(BM_Layer<ExecutionMode::Serial>)->LAYER_ARGS->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Layer<ExecutionMode::Parallel>)->LAYER_ARGS->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Forward<ExecutionMode::Serial>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Forward<ExecutionMode::Parallel>)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
