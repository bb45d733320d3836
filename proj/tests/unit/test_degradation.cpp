#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "fixtures.hpp"
#include "mrda/degradation.hpp"
#include "mrda/hr_source.hpp"
#include "mrda/image_io.hpp"
#include "oracles.hpp"

using namespace mrda;

namespace {

ImageTensor random_image(int h, int w, int c, Rng& rng) {
  ImageTensor img(h, w, c);
  for (double& v : img.values()) v = rng.uniform(0.0, 1.0);
  return img;
}

double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
  EXPECT_EQ(a.height(), b.height());
  EXPECT_EQ(a.width(), b.width());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace

TEST(Kernels, SumToOne) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const int size = 2 * rng.uniform_int(0, 10) + 1;
    EXPECT_NEAR(make_isotropic_kernel(rng.uniform(0.2, 4.0), size).sum(), 1.0, 1e-9);
    EXPECT_NEAR(make_anisotropic_kernel(rng.uniform(0.2, 4), rng.uniform(0.2, 4), rng.uniform(0, 3.1), size).sum(), 1.0,
                1e-9);
  }
  EXPECT_NEAR(make_delta_kernel().sum(), 1.0, 1e-12);
}

TEST(Kernels, MatchDensityFormulas) {
  const BlurKernel iso = make_isotropic_kernel(1.3, 9);
  const auto iso_ref = oracle::isotropic_kernel(1.3, 9);
  const BlurKernel an = make_anisotropic_kernel(2.5, 0.4, 0.7, 11);
  const auto an_ref = oracle::anisotropic_kernel(2.5, 0.4, 0.7, 11);
  for (std::size_t i = 0; i < iso_ref.size(); ++i) EXPECT_NEAR(iso.weights[i], iso_ref[i], 1e-12);
  for (std::size_t i = 0; i < an_ref.size(); ++i) EXPECT_NEAR(an.weights[i], an_ref[i], 1e-12);
}

TEST(Kernels, AnisotropicWithEqualEigenvaluesIsIsotropic) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const double lambda = rng.uniform(0.05, 16.0);
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const BlurKernel a = make_anisotropic_kernel(lambda, lambda, theta);
    const BlurKernel b = make_isotropic_kernel(std::sqrt(lambda));
    for (std::size_t k = 0; k < a.weights.size(); ++k) ASSERT_NEAR(a.weights[k], b.weights[k], 1e-9);
  }
}

TEST(Kernels, RotationByPiIsIdentityAndShapeIsTransposedByHalfPi) {
  const BlurKernel a = make_anisotropic_kernel(3.0, 0.5, 0.0, 7);
  const BlurKernel b = make_anisotropic_kernel(3.0, 0.5, std::numbers::pi / 2, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) EXPECT_NEAR(a(i, j), b(j, i), 1e-12);
  // theta = 0 stretches along columns (x).
  EXPECT_GT(a(3, 5), a(5, 3));
}

TEST(Kernels, Gaussian8Suite) {
  const auto s4 = gaussian8_suite(4);
  ASSERT_EQ(s4.size(), 8u);
  EXPECT_DOUBLE_EQ(s4.front().sigma, 1.8);
  EXPECT_DOUBLE_EQ(s4.back().sigma, 3.2);
  const auto s2 = gaussian8_suite(2);
  EXPECT_DOUBLE_EQ(s2.front().sigma, 0.8);
  EXPECT_DOUBLE_EQ(s2.back().sigma, 1.6);
  for (std::size_t i = 1; i < 8; ++i) EXPECT_NEAR(s4[i].sigma - s4[i - 1].sigma, 0.2, 1e-12);
}

TEST(DegradeClassic, MatchesNestedLoopOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int scale = rng.uniform_int(0, 1) ? 4 : 2;
    const int h = scale * rng.uniform_int(1, 16 / scale);
    const int w = scale * rng.uniform_int(1, 16 / scale);
    const ImageTensor hr = random_image(h, w, 3, rng);
    DegradationSpec spec;
    spec.scale = scale;
    spec.kernel_size = 2 * rng.uniform_int(0, 10) + 1;
    spec.kernel = rng.uniform_int(0, 1)
                      ? KernelSpec::isotropic(rng.uniform(0.2, 4.0))
                      : KernelSpec::anisotropic(rng.uniform(0.2, 4.0), rng.uniform(0.2, 4.0), rng.uniform(0, 3.14));
    const BlurKernel k = make_kernel(spec.kernel, spec.kernel_size);
    const ImageTensor expect = oracle::blur_subsample(hr, k.weights, k.size, scale);
    ASSERT_LT(max_abs_diff(degrade_classic(hr, spec), expect), 1e-6) << "trial " << trial;
  }
}

TEST(DegradeClassic, DeltaKernelDecimates) {
  Rng rng(4);
  const ImageTensor hr = random_image(16, 12, 3, rng);
  DegradationSpec spec;
  spec.kernel = KernelSpec::delta();
  EXPECT_EQ(degrade_classic(hr, spec), decimate(hr, 4));
}

TEST(DegradeClassic, NoiseHasRequestedStdAndIsSeeded) {
  ImageTensor hr(128, 128, 3, 0.5);
  DegradationSpec spec;
  spec.scale = 2;
  spec.kernel = KernelSpec::delta();
  spec.noise_sigma = 10.0;
  spec.rng_seed = 42;
  const ImageTensor a = degrade_classic(hr, spec);
  double s = 0.0, ss = 0.0;
  for (double v : a.values()) {
    s += v - 0.5;
    ss += (v - 0.5) * (v - 0.5);
  }
  const double n = double(a.size());
  EXPECT_NEAR(s / n, 0.0, 2e-3);
  EXPECT_NEAR(std::sqrt(ss / n), 10.0 / 255.0, 1e-3);
  EXPECT_EQ(a, degrade_classic(hr, spec));
  spec.rng_seed = 43;
  EXPECT_NE(a, degrade_classic(hr, spec));
}

TEST(DegradeClassic, OutputIsClipped) {
  ImageTensor hr(16, 16, 3, 0.99);
  DegradationSpec spec;
  spec.noise_sigma = 50.0;
  const ImageTensor lr = degrade_classic(hr, spec);
  for (double v : lr.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(DegradeClassic, RejectsBadScaleAndSize) {
  ImageTensor hr(16, 16, 3);
  DegradationSpec spec;
  spec.scale = 3;
  EXPECT_THROW(degrade_classic(hr, spec), std::invalid_argument);
  spec.scale = 4;
  EXPECT_THROW(degrade_classic(ImageTensor(10, 16, 3), spec), std::invalid_argument);
}

TEST(DegradeRealworld, FollowsStageOrder) {
  Rng rng(5);
  const ImageTensor hr = random_image(32, 32, 3, rng);
  DegradationSpec spec;
  spec.kernel = KernelSpec::isotropic(1.5);
  spec.op_order = {Stage::kBlur, Stage::kDownsample};
  spec.resize_method = ResizeMethod::kDecimate;
  // Blur then decimate is the classic model without noise.
  DegradationSpec classic = spec;
  classic.op_order.clear();
  EXPECT_LT(max_abs_diff(degrade_realworld(hr, spec), degrade_classic(hr, classic)), 1e-12);
  spec.op_order = {Stage::kDownsample, Stage::kBlur};
  const ImageTensor swapped = degrade_realworld(hr, spec);
  EXPECT_EQ(swapped.height(), 8);
  EXPECT_GT(max_abs_diff(swapped, degrade_classic(hr, classic)), 1e-3);
}

TEST(DegradeRealworld, SampledSpecsProduceValidImages) {
  Rng rng(6);
  const ImageTensor hr = synth_hr_image(32, 32, 1);
  for (int i = 0; i < 20; ++i) {
    SamplerConfig cfg;
    cfg.realworld_second_pass = i % 2 == 0;
    const DegradationSpec spec = sample_degradation(DegradationMode::kRealworld, 4, rng, cfg);
    std::multiset<Stage> stages(spec.op_order.begin(), spec.op_order.end());
    EXPECT_EQ(stages, (std::multiset<Stage>{Stage::kBlur, Stage::kDownsample, Stage::kNoise, Stage::kJpeg}));
    const ImageTensor lr = degrade(hr, spec);
    EXPECT_EQ(lr.height(), 8);
    EXPECT_EQ(lr.width(), 8);
    EXPECT_TRUE(lr.all_finite());
    for (double v : lr.values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(lr, degrade(hr, spec));
  }
}

TEST(DegradationSpec, JsonRoundTrip) {
  Rng rng(7);
  for (auto mode : {DegradationMode::kClassicIso, DegradationMode::kClassicAnisoNoise, DegradationMode::kRealworld}) {
    const DegradationSpec spec = sample_degradation(mode, 4, rng);
    EXPECT_EQ(spec_from_json(nlohmann::json::parse(to_json(spec).dump())), spec);
  }
  EXPECT_EQ(parse_mode(mode_name(DegradationMode::kRealworld)), DegradationMode::kRealworld);
  EXPECT_THROW(parse_mode("blurry"), std::invalid_argument);
}

TEST(Sampler, RangesPerMode) {
  Rng rng(8);
  SamplerConfig cfg;
  std::set<double> noise_seen;
  for (int i = 0; i < 400; ++i) {
    const auto iso = sample_degradation(DegradationMode::kClassicIso, 4, rng);
    EXPECT_EQ(iso.kernel.kind, KernelSpec::Kind::kIsotropic);
    EXPECT_GE(iso.kernel.sigma, 0.2);
    EXPECT_LE(iso.kernel.sigma, 4.0);
    const auto iso2 = sample_degradation(DegradationMode::kClassicIso, 2, rng);
    EXPECT_LE(iso2.kernel.sigma, 2.0);
    const auto an = sample_degradation(DegradationMode::kClassicAnisoNoise, 4, rng, cfg);
    EXPECT_EQ(an.kernel.kind, KernelSpec::Kind::kAnisotropic);
    EXPECT_GE(an.kernel.lambda1, 0.2);
    EXPECT_LE(an.kernel.lambda2, 4.0);
    EXPECT_GE(an.kernel.theta, 0.0);
    EXPECT_LT(an.kernel.theta, std::numbers::pi);
    noise_seen.insert(an.noise_sigma);
    const auto rw = sample_degradation(DegradationMode::kRealworld, 4, rng, cfg);
    ASSERT_TRUE(rw.jpeg_quality.has_value());
    EXPECT_GE(*rw.jpeg_quality, 30);
    EXPECT_LE(*rw.jpeg_quality, 95);
    EXPECT_LE(rw.noise_sigma, 25.0);
  }
  EXPECT_EQ(noise_seen, (std::set<double>{0.0, 10.0, 20.0, 25.0}));
}

TEST(Sampler, DeterministicFromSeed) {
  Rng a(9), b(9);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(sample_degradation(DegradationMode::kRealworld, 4, a),
              sample_degradation(DegradationMode::kRealworld, 4, b));
}

TEST(Resize, BicubicShrinkMatchesPillow) {
  const ImageTensor out = resize_bicubic(fixtures::bicubic_down_source(), 8, 8);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_NEAR(out(y + 2, x + 2, 0), fixtures::kBicubicDown[y][x], 1e-6);
}

TEST(Resize, BicubicEnlargeMatchesPillow) {
  const ImageTensor out = resize_bicubic(fixtures::bicubic_up_source(), 32, 32);
  for (const auto& s : fixtures::kBicubicUp) EXPECT_NEAR(out(s.y, s.x, 0), s.value, 1e-6);
}

TEST(Resize, PreservesConstantsAndIdentity) {
  ImageTensor flat(12, 12, 3, 0.3);
  const ImageTensor small = resize_bicubic(flat, 3, 3);
  const ImageTensor large = resize_bicubic(flat, 24, 24);
  for (double v : small.values()) EXPECT_NEAR(v, 0.3, 1e-12);
  for (double v : large.values()) EXPECT_NEAR(v, 0.3, 1e-12);
  Rng rng(10);
  const ImageTensor img = random_image(9, 7, 3, rng);
  EXPECT_LT(max_abs_diff(resize_bicubic(img, 9, 7), img), 1e-12);
}

TEST(Resize, AreaAndDecimate) {
  ImageTensor img(4, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img(y, x, 0) = y * 4 + x;
  const ImageTensor a = resize_area(img, 2);
  EXPECT_DOUBLE_EQ(a(0, 0, 0), (0 + 1 + 4 + 5) / 4.0);
  EXPECT_DOUBLE_EQ(a(1, 1, 0), (10 + 11 + 14 + 15) / 4.0);
  const ImageTensor d = decimate(img, 2);
  EXPECT_DOUBLE_EQ(d(1, 0, 0), 8.0);
  EXPECT_EQ(downscale(img, 2, ResizeMethod::kArea), a);
  EXPECT_THROW(downscale(ImageTensor(5, 4, 1), 2, ResizeMethod::kDecimate), std::invalid_argument);
}

TEST(ImageIo, PngRoundTripQuantizes) {
  Rng rng(11);
  const ImageTensor img = random_image(5, 6, 3, rng);
  const auto path = std::filesystem::temp_directory_path() / "mrda_degradation_io.png";
  write_png(path, img);
  const ImageTensor back = read_image(path);
  EXPECT_LE(max_abs_diff(back, img), 0.5 / 255.0 + 1e-12);
  std::filesystem::remove(path);
}

TEST(ImageIo, JpegRoundTripIsDeterministic) {
  const ImageTensor img = synth_hr_image(32, 32, 3);
  const ImageTensor a = jpeg_roundtrip(img, 40);
  EXPECT_EQ(a, jpeg_roundtrip(img, 40));
  EXPECT_GT(max_abs_diff(a, img), 1e-3);
}

TEST(HrSource, SyntheticIsDeterministicAndPatchesFit) {
  const HrSource a = HrSource::synthetic(3, 48, 5);
  const HrSource b = HrSource::synthetic(3, 48, 5);
  EXPECT_EQ(a.image(2), b.image(2));
  EXPECT_NE(a.image(0), a.image(1));
  Rng rng(12);
  const ImageTensor p = a.sample_patch(16, rng);
  EXPECT_EQ(p.height(), 16);
  EXPECT_EQ(p.channels(), 3);
}

TEST(Image, AugmentIsDihedral) {
  Rng rng(13);
  const ImageTensor img = random_image(3, 5, 1, rng);
  const ImageTensor r1 = augment(img, false, false, 1);
  EXPECT_EQ(r1.height(), 5);
  EXPECT_EQ(augment(augment(img, false, false, 2), false, false, 2), img);
  EXPECT_EQ(augment(augment(img, true, false, 0), true, false, 0), img);
}
