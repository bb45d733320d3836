#include <benchmark/benchmark.h>

#include "mrda/degradation.hpp"
#include "mrda/hr_source.hpp"
#include "mrda/mln.hpp"
#include "mrda/nn/ops.hpp"
#include "mrda/rdan.hpp"

using namespace mrda;
using namespace mrda::nn;

namespace {

Tensor<float> filled(Shape shape, float step) {
  Tensor<float> t(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = float(i % 97) * step - 0.5f;
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), hw = static_cast<int>(state.range(1));
  const Tensor<float> x = filled({4, c, hw, hw}, 0.01f), w = filled({c, c, 3, 3}, 0.001f), b = filled({c}, 0.01f);
  for (auto _ : state) {
    Tape<float> t;
    Var y = conv2d(t, t.constant(x), t.constant(w), t.constant(b), 1, 1);
    benchmark::DoNotOptimize(t.value(y).data());
  }
  state.SetItemsProcessed(state.iterations() * 4 * c * c * hw * hw * 9);
}
BENCHMARK(BM_Conv2dForward)->Args({16, 32})->Args({64, 32})->Args({64, 64});

void BM_Conv2dBackward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const Tensor<float> x = filled({4, c, 32, 32}, 0.01f), w = filled({c, c, 3, 3}, 0.001f), b = filled({c}, 0.01f);
  for (auto _ : state) {
    Tape<float> t;
    Var wv = t.variable(w);
    t.backward(sum(t, conv2d(t, t.constant(x), wv, t.constant(b), 1, 1)));
    benchmark::DoNotOptimize(t.grad(wv).data());
  }
}
BENCHMARK(BM_Conv2dBackward)->Arg(16)->Arg(64);

void BM_DegradeClassic(benchmark::State& state) {
  const ImageTensor hr = synth_hr_image(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 1);
  DegradationSpec spec;
  spec.kernel = KernelSpec::isotropic(2.4);
  spec.noise_sigma = 10.0;
  for (auto _ : state) {
    ImageTensor lr = degrade_classic(hr, spec);
    benchmark::DoNotOptimize(lr.values().data());
  }
}
BENCHMARK(BM_DegradeClassic)->Arg(128)->Arg(256);

void BM_MlnForward(benchmark::State& state) {
  const MlnModel m = mln_init({static_cast<int>(state.range(0)), 4}, 1);
  const Tensor<float> lr = filled({1, 3, 32, 32}, 0.01f);
  for (auto _ : state) benchmark::DoNotOptimize(mln_forward(m.params, lr, 4).sr.data());
}
BENCHMARK(BM_MlnForward)->Arg(16)->Arg(64);

void BM_RdanForward(benchmark::State& state) {
  const RdanModel m = rdan_init({16, 4, 3, 64, 64, 4}, 1);
  const Tensor<float> lr = filled({1, 3, 32, 32}, 0.01f), d = filled({1, 64}, 0.001f);
  for (auto _ : state) benchmark::DoNotOptimize(rdan_forward(m, lr, d).data());
}
BENCHMARK(BM_RdanForward);

}  // namespace

BENCHMARK_MAIN();
