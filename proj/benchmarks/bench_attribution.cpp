#include <benchmark/benchmark.h>

#include "expeval/attribution.hpp"
#include "expeval/model.hpp"
#include "expeval/rng.hpp"

using namespace expeval;

namespace {

const char* kArch = "conv:8:3|relu|avgpool:2|conv:16:3|relu|flatten|dense:4";

Tensor make_input(int size, uint64_t seed) {
  Tensor x({1, size, size});
  Rng rng(seed);
  for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform();
  return x;
}

void BM_Forward(benchmark::State& state) {
  Model model(kArch, {1, 16, 16}, 1);
  Tensor x = make_input(16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, x).logits()[0]);
}
BENCHMARK(BM_Forward);

void BM_InputGradient(benchmark::State& state) {
  Model model(kArch, {1, 16, 16}, 1);
  Tensor x = make_input(16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(grad_wrt_input(model, x, 0).sum());
}
BENCHMARK(BM_InputGradient);

void BM_Saliency(benchmark::State& state) {
  Model model(kArch, {1, 16, 16}, 1);
  Tensor x = make_input(16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(saliency(model, x, 0).values.sum());
}
BENCHMARK(BM_Saliency);

void BM_IntegratedGradients(benchmark::State& state) {
  Model model(kArch, {1, 16, 16}, 1);
  Tensor x = make_input(16, 2);
  AttributionConfig cfg;
  cfg.ig_steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrated_gradients(model, x, 0, cfg).values.sum());
  }
}
BENCHMARK(BM_IntegratedGradients)->Arg(20)->Arg(60);

void BM_SmoothGrad(benchmark::State& state) {
  Model model(kArch, {1, 16, 16}, 1);
  Tensor x = make_input(16, 2);
  AttributionConfig cfg;
  cfg.sg_samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(smoothgrad(model, x, 0, cfg).values.sum());
}
BENCHMARK(BM_SmoothGrad)->Arg(20)->Arg(60);

void BM_GradCam(benchmark::State& state) {
  Model model(kArch, {1, 16, 16}, 1);
  Tensor x = make_input(16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(grad_cam(model, x, 0).values.sum());
}
BENCHMARK(BM_GradCam);

}  // namespace
