#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mrda/den.hpp"
#include "param_fd.hpp"

using namespace mrda;
using namespace mrda::nn;

namespace {

Tensor<float> periodic_input(int c, int h, int w, int shift) {
  Tensor<float> x({1, c, h, w});
  for (int k = 0; k < c; ++k)
    for (int y = 0; y < h; ++y)
      for (int i = 0; i < w; ++i) {
        const int xx = (i + shift) % w;
        x.at(0, k, y, i) = float(0.5 + 0.4 * std::sin(2 * M_PI * xx / w * (k + 1)) * std::cos(2 * M_PI * y / h));
      }
  return x;
}

}  // namespace

TEST(Den, OutputShapeAndNames) {
  const DenModel den = den_init({3, 8, 12}, 1);
  for (int i = 0; i < kDenConvs; ++i) EXPECT_TRUE(den.params.contains("conv" + std::to_string(i) + ".weight"));
  EXPECT_EQ(den.params.tensor("conv0.weight").dim(1), 3);
  const Tensor<float> d = den_forward(den.params, Tensor<float>({2, 3, 16, 12}, 0.3f));
  EXPECT_EQ(d.shape(), (Shape{2, 12}));
}

TEST(Den, TeacherTakesFeatureChannels) {
  const DenModel den = den_init({5, 8, 4}, 2);
  EXPECT_EQ(den.params.tensor("conv0.weight").dim(1), 5);
  EXPECT_THROW(den_forward(den.params, Tensor<float>({1, 3, 8, 8})), std::invalid_argument);
}

TEST(Den, SmallInputsStillPool) {
  const DenModel den = den_init({3, 4, 6}, 3);
  EXPECT_EQ(den_forward(den.params, Tensor<float>({1, 3, 1, 1}, 0.5f)).shape(), (Shape{1, 6}));
}

TEST(Den, PoolingInvariantToStrideMultipleCircularShift) {
  // Zero padding breaks exact invariance at the borders; on wide periodic
  // inputs the interior dominates the average.
  const DenModel den = den_init({3, 8, 6}, 4);
  const Tensor<float> a = den_forward(den.params, periodic_input(3, 8, 64, 0));
  const Tensor<float> b = den_forward(den.params, periodic_input(3, 8, 64, 8));
  double diff = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    diff = std::max(diff, double(std::abs(a[i] - b[i])));
    mag = std::max(mag, double(std::abs(a[i])));
  }
  EXPECT_LT(diff, 0.05 * mag + 1e-4);
}

TEST(Den, SoftmaxNormalize) {
  const std::vector<double> v{1000.0, 1000.0, 999.0};
  const auto p = softmax_normalize(v);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(p[0], p[1]);
  EXPECT_NEAR(p[0] / p[2], std::exp(1.0), 1e-9);
}

TEST(Den, CopyBodySkipsFirstConv) {
  const DenModel teacher = den_init({6, 4, 5}, 5);
  DenModel student = den_init({3, 4, 5}, 6);
  const Tensor<float> first = student.params.tensor("conv0.weight");
  copy_den_body(teacher.params, student.params);
  EXPECT_EQ(student.params.tensor("conv0.weight"), first);
  EXPECT_EQ(student.params.tensor("conv3.weight"), teacher.params.tensor("conv3.weight"));
  EXPECT_EQ(student.params.tensor("fc.weight"), teacher.params.tensor("fc.weight"));
  DenModel other = den_init({3, 8, 5}, 7);
  EXPECT_THROW(copy_den_body(teacher.params, other.params), std::invalid_argument);
}

TEST(Den, GradientsMatchFiniteDifferences) {
  const DenModel den = den_init({3, 3, 4}, 8);
  Tensor<double> x({1, 3, 6, 6});
  for (std::size_t i = 0; i < x.numel(); ++i) x[i] = std::sin(0.7 * double(i));
  const double err = oracle::param_grad_error(den.params.cast<double>(),
                                              [&](Tape<double>& t, const ParamBinding<double>& b) {
                                                Var d = den_forward(t, b, t.constant(x));
                                                return sum(t, mul(t, d, d));
                                              });
  EXPECT_LT(err, 1e-4);
}
