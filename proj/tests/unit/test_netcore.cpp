#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "mrda/nn/checkpoint.hpp"
#include "mrda/nn/grad_check.hpp"
#include "mrda/nn/layers.hpp"
#include "mrda/nn/optim.hpp"
#include "oracles.hpp"
#include "param_fd.hpp"

using namespace mrda;
using namespace mrda::nn;

namespace {

template <typename T>
Tensor<T> random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<T> t(std::move(shape));
  for (T& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  EXPECT_EQ(a.shape(), b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mrda_netcore_" + name);
}

}  // namespace

TEST(Conv2d, MatchesNaiveLoops) {
  Rng rng(1);
  for (int stride : {1, 2})
    for (int pad : {0, 1, 2}) {
      auto x = random_tensor<double>({2, 3, 7, 6}, rng);
      auto w = random_tensor<double>({4, 3, 3, 3}, rng);
      auto b = random_tensor<double>({4}, rng);
      Tape<double> tape;
      Var out = conv2d(tape, tape.constant(x), tape.constant(w), tape.constant(b), stride, pad);
      EXPECT_LT(max_abs_diff(tape.value(out), oracle::conv2d(x, w, &b, stride, pad)), 1e-12);
    }
}

TEST(Conv2d, WithoutBias) {
  Rng rng(2);
  auto x = random_tensor<float>({1, 2, 5, 5}, rng);
  auto w = random_tensor<float>({3, 2, 1, 1}, rng);
  Tape<float> tape;
  Var out = conv2d(tape, tape.constant(x), tape.constant(w), Var{}, 1, 0);
  EXPECT_LT(max_abs_diff(tape.value(out), oracle::conv2d<float>(x, w, nullptr, 1, 0)), 1e-5);
}

TEST(Conv2d, RejectsChannelMismatch) {
  Tape<double> tape;
  Var x = tape.constant(Tensor<double>({1, 2, 4, 4}));
  Var w = tape.constant(Tensor<double>({1, 3, 3, 3}));
  EXPECT_THROW(conv2d(tape, x, w, Var{}, 1, 1), std::invalid_argument);
}

TEST(DepthwiseConv, MatchesNaiveLoops) {
  Rng rng(3);
  auto x = random_tensor<double>({2, 3, 6, 5}, rng);
  auto w = random_tensor<double>({6, 1, 3, 3}, rng);
  Tape<double> tape;
  Var out = depthwise_conv2d(tape, tape.constant(x), tape.constant(w));
  EXPECT_LT(max_abs_diff(tape.value(out), oracle::depthwise(x, w)), 1e-12);
}

TEST(PixelShuffle, MatchesIndexFormula) {
  Rng rng(4);
  auto x = random_tensor<double>({2, 8, 3, 4}, rng);
  Tape<double> tape;
  Var out = pixel_shuffle(tape, tape.constant(x), 2);
  EXPECT_EQ(tape.value(out), oracle::pixel_shuffle(x, 2));
}

TEST(Ops, ElementwiseValues) {
  Tape<double> tape;
  Var a = tape.constant(Tensor<double>({4}, {-2.0, -0.5, 0.0, 3.0}));
  Var b = tape.constant(Tensor<double>({4}, {1.0, 2.0, 3.0, 4.0}));
  const auto& lr = tape.value(leaky_relu(tape, a));
  EXPECT_DOUBLE_EQ(lr[0], -0.2);
  EXPECT_DOUBLE_EQ(lr[3], 3.0);
  EXPECT_DOUBLE_EQ(tape.value(sigmoid(tape, a))[2], 0.5);
  EXPECT_DOUBLE_EQ(tape.value(add(tape, a, b))[1], 1.5);
  EXPECT_DOUBLE_EQ(tape.value(mul(tape, a, b))[3], 12.0);
  EXPECT_DOUBLE_EQ(tape.value(scale(tape, a, 2.0))[0], -4.0);
  EXPECT_DOUBLE_EQ(tape.value(sum(tape, b))[0], 10.0);
  EXPECT_DOUBLE_EQ(tape.value(mean_abs_diff(tape, a, b))[0], (3.0 + 2.5 + 3.0 + 1.0) / 4.0);
}

TEST(Ops, GlobalAvgPoolAndLinear) {
  Tape<double> tape;
  Tensor<double> x({1, 2, 2, 2}, {1, 2, 3, 4, 10, 10, 10, 10});
  Var p = global_avg_pool(tape, tape.constant(x));
  EXPECT_EQ(tape.value(p).shape(), (Shape{1, 2}));
  EXPECT_DOUBLE_EQ(tape.value(p)[0], 2.5);
  Var w = tape.constant(Tensor<double>({1, 2}, {1.0, -1.0}));
  Var b = tape.constant(Tensor<double>({1}, {0.5}));
  EXPECT_DOUBLE_EQ(tape.value(linear(tape, p, w, b))[0], 2.5 - 10.0 + 0.5);
}

TEST(Ops, DetachBlocksGradient) {
  Tape<double> tape;
  Var x = tape.variable(Tensor<double>({2}, {1.0, 2.0}));
  Var y = sum(tape, mul(tape, detach(tape, x), x));
  tape.backward(y);
  // d/dx (stop(x) * x) = stop(x)
  EXPECT_DOUBLE_EQ(tape.grad(x)[0], 1.0);
  EXPECT_DOUBLE_EQ(tape.grad(x)[1], 2.0);
}

TEST(GradCheck, Conv2d) {
  Rng rng(5);
  auto r = grad_check(
      [](Tape<double>& t, std::span<const Var> in) {
        return sum(t, leaky_relu(t, conv2d(t, in[0], in[1], in[2], 2, 1)));
      },
      {random_tensor<double>({1, 2, 5, 5}, rng), random_tensor<double>({3, 2, 3, 3}, rng),
       random_tensor<double>({3}, rng)});
  EXPECT_LT(r.max_rel_error, 1e-4);
  EXPECT_GT(r.checked, 0u);
}

TEST(GradCheck, DepthwiseAndShuffle) {
  Rng rng(6);
  auto r = grad_check(
      [](Tape<double>& t, std::span<const Var> in) {
        Var y = pixel_shuffle(t, depthwise_conv2d(t, in[0], in[1]), 2);
        return sum(t, mul(t, y, y));
      },
      {random_tensor<double>({1, 4, 3, 3}, rng), random_tensor<double>({4, 1, 3, 3}, rng)});
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(GradCheck, SigmoidLinearPoolSoftmaxKl) {
  Rng rng(7);
  // Teacher logits stay constant: softmax_kl never sends gradient to them.
  const Tensor<double> teacher = random_tensor<double>({2, 4}, rng);
  auto r = grad_check(
      [&](Tape<double>& t, std::span<const Var> in) {
        Var pooled = global_avg_pool(t, sigmoid(t, in[0]));
        Var s = linear(t, pooled, in[1], in[2]);
        Var d = t.constant(teacher);
        return add(t, softmax_kl(t, d, s), scale(t, mean_abs_diff(t, s, d), 0.5));
      },
      {random_tensor<double>({2, 3, 2, 2}, rng), random_tensor<double>({4, 3}, rng), random_tensor<double>({4}, rng)});
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(SoftmaxKl, TeacherReceivesNoGradient) {
  Tape<double> tape;
  Var d_t = tape.variable(Tensor<double>({1, 2}, {1.0, 0.0}));
  Var d_s = tape.variable(Tensor<double>({1, 2}, {0.0, 1.0}));
  tape.backward(softmax_kl(tape, d_t, d_s));
  EXPECT_EQ(tape.grad(d_t)[0], 0.0);
  EXPECT_NE(tape.grad(d_s)[0], 0.0);
}

TEST(ParamSet, AddAssignAndMask) {
  ParamSet p;
  p.add("a", Tensor<float>({2}, {1, 2}));
  p.add("b", Tensor<float>({1}, {3}), false);
  EXPECT_THROW(p.add("a", Tensor<float>({1})), std::invalid_argument);
  EXPECT_THROW(p.assign("a", Tensor<float>({3})), std::invalid_argument);
  p.assign("a", Tensor<float>({2}, {5, 6}));
  EXPECT_EQ(p.tensor("a")[1], 6.0f);
  EXPECT_TRUE(p.meta_mask("a"));
  EXPECT_FALSE(p.meta_mask("b"));
  EXPECT_EQ(p.total_elements(), 3u);
  EXPECT_TRUE(p.same_structure(p.zeros_like()));
  EXPECT_EQ(p.cast<double>().cast<float>(), p);
}

TEST(ParamSet, MaskedSgdLeavesFrozenEntriesBitwise) {
  ParamSet p;
  p.add("free", Tensor<float>({2}, {1.0f, 1.0f}));
  p.add("frozen", Tensor<float>({2}, {0.1f, 0.2f}), false);
  ParamSet g = p.zeros_like();
  for (auto& v : g.values("free")) v = 1.0f;
  for (auto& v : g.values("frozen")) v = 1.0f;
  const Tensor<float> before = p.tensor("frozen");
  masked_sgd_step(p, g, 0.5f);
  EXPECT_EQ(p.tensor("free")[0], 0.5f);
  EXPECT_EQ(p.tensor("frozen"), before);
  axpy(p, g, 2.0f);
  EXPECT_EQ(p.tensor("free")[0], 2.5f);
}

TEST(ParamBinding, GradientsFollowScope) {
  ParamSet p;
  p.add("w", Tensor<float>({1}, {2.0f}));
  p.add("u", Tensor<float>({1}, {3.0f}), false);
  Tape<float> tape;
  ParamBinding<float> b(tape, p, GradScope::kMetaMasked);
  tape.backward(sum(tape, mul(tape, b["w"], b["u"])));
  ParamSet g = b.gradients(tape);
  EXPECT_FLOAT_EQ(g.tensor("w")[0], 3.0f);
  EXPECT_FLOAT_EQ(g.tensor("u")[0], 0.0f);
}

TEST(Adam, FirstStepMovesByLr) {
  ParamSet p;
  p.add("w", Tensor<float>({2}, {1.0f, -1.0f}));
  p.add("f", Tensor<float>({1}, {4.0f}), false);
  ParamSet g = p.zeros_like();
  g.values("w")[0] = 3.0f;
  g.values("w")[1] = -0.01f;
  g.values("f")[0] = 1.0f;
  Adam opt(p, AdamOptions{0.1});
  opt.step(p, g, UpdateScope::kMetaMasked);
  // Bias-corrected first step is lr * sign(g).
  EXPECT_NEAR(p.tensor("w")[0], 0.9f, 1e-6);
  EXPECT_NEAR(p.tensor("w")[1], -0.9f, 1e-5);
  EXPECT_EQ(p.tensor("f")[0], 4.0f);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Adam, MinimizesQuadratic) {
  ParamSet p;
  p.add("x", Tensor<float>({1}, {5.0f}));
  Adam opt(p, AdamOptions{0.1});
  for (int i = 0; i < 500; ++i) {
    ParamSet g = p.zeros_like();
    g.values("x")[0] = 2.0f * (p.tensor("x")[0] - 1.0f);
    opt.step(p, g);
  }
  EXPECT_NEAR(p.tensor("x")[0], 1.0f, 1e-2);
}

TEST(LrSchedule, HalvesEveryPeriod) {
  EXPECT_DOUBLE_EQ(lr_schedule(0, 1.0, 10), 1.0);
  EXPECT_DOUBLE_EQ(lr_schedule(9, 1.0, 10), 1.0);
  EXPECT_DOUBLE_EQ(lr_schedule(10, 1.0, 10), 0.5);
  EXPECT_DOUBLE_EQ(lr_schedule(35, 1.0, 10), 0.125);
  EXPECT_DOUBLE_EQ(lr_schedule(1000, 2.0, 0), 2.0);
}

TEST(Layers, UpscalerShapeAndInit) {
  Rng rng(8);
  ParamSet p;
  add_conv_params(p, "c", 4, 3, 3, rng);
  EXPECT_EQ(p.tensor("c.weight").shape(), (Shape{4, 3, 3, 3}));
  for (float v : p.tensor("c.bias").values()) EXPECT_EQ(v, 0.0f);
  add_upscaler_params(p, "up", 4, 3, 4, rng);
  EXPECT_EQ(upscaler_stages(2), 1);
  EXPECT_EQ(upscaler_stages(4), 2);
  EXPECT_THROW(upscaler_stages(3), std::invalid_argument);
  Tape<float> tape;
  ParamBinding<float> b(tape, p);
  Var x = tape.constant(Tensor<float>({1, 4, 3, 5}, 0.5f));
  EXPECT_EQ(tape.value(upscale(tape, b, "up", x, 4)).shape(), (Shape{1, 3, 12, 20}));
}

TEST(GradCheck, Upscale) {
  Rng rng(9);
  ParamSet pf;
  add_upscaler_params(pf, "up", 2, 3, 4, rng);
  const Tensor<double> x = random_tensor<double>({1, 2, 2, 2}, rng);
  const double err = oracle::param_grad_error(pf.cast<double>(), [&](Tape<double>& t, const ParamBinding<double>& b) {
    Var y = upscale(t, b, "up", t.constant(x), 4);
    return sum(t, mul(t, y, y));
  });
  EXPECT_LT(err, 1e-4);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  Rng rng(10);
  ParamSet p;
  add_conv_params(p, "a", 3, 2, 3, rng);
  p.set_meta_mask("a.bias", false);
  const auto path = temp_path("rt.ckpt");
  save_checkpoint(path, p, {{"stage", 1}});
  Checkpoint c = load_checkpoint(path);
  EXPECT_EQ(c.params, p);
  EXPECT_FALSE(c.params.meta_mask("a.bias"));
  EXPECT_EQ(c.meta["stage"], 1);
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsCorruptFiles) {
  ParamSet p;
  p.add("w", Tensor<float>({4}, 1.0f));
  const auto path = temp_path("bad.ckpt");
  save_checkpoint(path, p, {});
  const auto full = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, full - 3);
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "NOTACKPT-garbage";
  }
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
}

TEST(Checkpoint, PrefixHelpers) {
  ParamSet a;
  a.add("x", Tensor<float>({1}, 1.0f));
  ParamSet all;
  merge_prefixed(all, a, "den.");
  merge_prefixed(all, a, "rdan.");
  EXPECT_TRUE(all.contains("den.x"));
  EXPECT_EQ(extract_prefixed(all, "rdan."), a);
}

TEST(Tensor, StorageIsCacheLineAligned) {
  for (int n : {1, 3, 17, 1000}) {
    Tensor<float> t({n});
    EXPECT_EQ(reinterpret_cast<std::uintptr_t>(t.data()) % 64, 0u);
  }
  const Tensor<double> c = Tensor<float>({5}, 1.0f).cast<double>();
  EXPECT_EQ(reinterpret_cast<std::uintptr_t>(c.data()) % 64, 0u);
}

TEST(Determinism, GradientsRepeatBitwiseUnderHeapChurn) {
  Rng rng(11);
  const auto x = random_tensor<float>({2, 4, 9, 9}, rng);
  const auto w = random_tensor<float>({6, 4, 3, 3}, rng);
  const auto b = random_tensor<float>({6}, rng);
  const auto fc = random_tensor<float>({5, 6}, rng);
  auto run = [&] {
    Tape<float> t;
    Var wv = t.variable(w), bv = t.variable(b), fv = t.variable(fc);
    Var h = leaky_relu(t, conv2d(t, t.constant(x), wv, bv, 1, 1));
    Var y = linear(t, global_avg_pool(t, h), fv, Var{});
    t.backward(sum(t, mul(t, y, y)));
    return std::vector<Tensor<float>>{t.grad(wv), t.grad(bv), t.grad(fv)};
  };
  const auto ref = run();
  std::vector<std::vector<char>> junk;
  for (int i = 0; i < 20; ++i) {
    junk.emplace_back(static_cast<std::size_t>(i * 13 + 1));
    ASSERT_EQ(run(), ref) << "repeat " << i;
  }
}
