#include <gtest/gtest.h>

#include <cmath>

#include "mrda/losses.hpp"
#include "mrda/nn/grad_check.hpp"
#include "mrda/rng.hpp"
#include "oracles.hpp"

using namespace mrda;
using namespace mrda::nn;

namespace {

Tensor<double> random_rows(int n, int d, Rng& rng, double spread = 3.0) {
  Tensor<double> t({n, d});
  for (double& v : t.values()) v = rng.uniform(-spread, spread);
  return t;
}

double eval(const std::function<Var(Tape<double>&)>& f) {
  Tape<double> tape;
  return tape.value(f(tape))[0];
}

}  // namespace

TEST(LossKl, ZeroOnIdenticalAndNonnegative) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_rows(1, 8, rng);
    const auto b = random_rows(1, 8, rng);
    EXPECT_NEAR(eval([&](Tape<double>& t) { return l_kl(t, t.constant(a), t.constant(a)); }), 0.0, 1e-15);
    ASSERT_GE(eval([&](Tape<double>& t) { return l_kl(t, t.constant(a), t.constant(b)); }), 0.0);
  }
}

TEST(LossKl, TwoComponentClosedForm) {
  const Tensor<double> dt({1, 2}, {1.0, 0.0});
  const Tensor<double> ds({1, 2}, {0.0, 1.0});
  const double got = eval([&](Tape<double>& t) { return l_kl(t, t.constant(dt), t.constant(ds)); });
  EXPECT_NEAR(got, oracle::kl_two_component(), 1e-7);
  EXPECT_NEAR(l_kl_value(dt.values(), ds.values()), oracle::kl_two_component(), 1e-7);
}

TEST(LossKl, ShiftInvariantInLogits) {
  Rng rng(2);
  auto a = random_rows(2, 5, rng);
  const auto b = random_rows(2, 5, rng);
  const double base = eval([&](Tape<double>& t) { return l_kl(t, t.constant(a), t.constant(b)); });
  for (double& v : a.values()) v += 7.0;
  EXPECT_NEAR(eval([&](Tape<double>& t) { return l_kl(t, t.constant(a), t.constant(b)); }), base, 1e-12);
}

TEST(LossAbs, MatchesDefinition) {
  const Tensor<double> dt({2, 2}, {1.0, 2.0, 0.0, 0.0});
  const Tensor<double> ds({2, 2}, {0.0, 4.0, 1.0, -1.0});
  // rows: (1 + 2) / 2 and (1 + 1) / 2, averaged
  EXPECT_DOUBLE_EQ(eval([&](Tape<double>& t) { return l_abs(t, t.constant(dt), t.constant(ds)); }), 1.25);
  const std::vector<double> a{1.0, 2.0}, b{0.0, 4.0};
  EXPECT_DOUBLE_EQ(l_abs_value(a, b), 1.5);
}

TEST(LossRec, IsMeanAbsoluteError) {
  const Tensor<double> sr({1, 1, 1, 4}, {0.0, 0.5, 1.0, 1.0});
  const Tensor<double> hr({1, 1, 1, 4}, {1.0, 0.5, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(eval([&](Tape<double>& t) { return l_rec(t, t.constant(sr), t.constant(hr)); }), 0.5);
}

TEST(LossClassic, ZeroWeightsEqualReconstruction) {
  Rng rng(3);
  Tensor<double> sr({2, 3, 4, 4}), hr({2, 3, 4, 4});
  for (double& v : sr.values()) v = rng.uniform(0, 1);
  for (double& v : hr.values()) v = rng.uniform(0, 1);
  const auto dt = random_rows(2, 6, rng), ds = random_rows(2, 6, rng);
  const double rec = eval([&](Tape<double>& t) { return l_rec(t, t.constant(sr), t.constant(hr)); });
  const double cls = eval([&](Tape<double>& t) {
    return l_classic(t, t.constant(sr), t.constant(hr), t.constant(dt), t.constant(ds), 0.0, 0.0);
  });
  EXPECT_EQ(cls, rec);
  const double kl = eval([&](Tape<double>& t) { return l_kl(t, t.constant(dt), t.constant(ds)); });
  const double ab = eval([&](Tape<double>& t) { return l_abs(t, t.constant(dt), t.constant(ds)); });
  const double mixed = eval([&](Tape<double>& t) {
    return l_classic(t, t.constant(sr), t.constant(hr), t.constant(dt), t.constant(ds), 1.0, 0.01);
  });
  EXPECT_NEAR(mixed, rec + kl + 0.01 * ab, 1e-12);
}

TEST(LossGrad, RecKlAbs) {
  Rng rng(4);
  Tensor<double> hr({1, 3, 3, 3});
  for (double& v : hr.values()) v = rng.uniform(0, 1);
  const auto dt = random_rows(2, 5, rng);
  auto r = grad_check(
      [&](Tape<double>& t, std::span<const Var> in) {
        Var d = t.constant(dt);
        Var loss = add(t, l_rec(t, in[0], t.constant(hr)), l_kl(t, d, in[1]));
        return add(t, loss, l_abs(t, d, in[1]));
      },
      {[&] {
         Tensor<double> sr({1, 3, 3, 3});
         // keep away from the |.| kink
         for (std::size_t i = 0; i < sr.numel(); ++i) sr[i] = hr[i] + (i % 2 ? 0.1 : -0.1);
         return sr;
       }(),
       [&] {
         Tensor<double> ds = dt;
         for (std::size_t i = 0; i < ds.numel(); ++i) ds[i] += (i % 2 ? 0.3 : -0.3);
         return ds;
       }()});
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(LossGrad, TeacherIsDetached) {
  Tape<double> tape;
  Var dt = tape.variable(Tensor<double>({1, 3}, {0.1, 0.2, 0.3}));
  Var ds = tape.variable(Tensor<double>({1, 3}, {0.3, 0.2, 0.0}));
  tape.backward(add(tape, l_kl(tape, dt, ds), l_abs(tape, dt, ds)));
  const Tensor<double> g = tape.grad(dt);
  for (double v : g.values()) EXPECT_EQ(v, 0.0);
}
