#pragma once

// Frozen metric and resize fixtures. PSNR/SSIM values were produced by
// scikit-image (peak_signal_noise_ratio, structural_similarity with
// gaussian_weights=True, sigma=1.5, use_sample_covariance=False,
// data_range=1) on the luma defined below. Bicubic values come from
// Pillow's BICUBIC filter on float32 ("F" mode) images.

#include <cmath>

#include "mrda/image.hpp"

namespace fixtures {

using mrda::ImageTensor;

struct MetricFixture {
  ImageTensor reference;
  ImageTensor distorted;
  double psnr_crop0;
  double psnr_crop2;
  double psnr_crop4;
  double ssim;
};

inline double clip01(double v) { return v < 0 ? 0 : (v > 1 ? 1 : v); }

inline MetricFixture smooth_rgb() {
  MetricFixture f{ImageTensor(24, 20, 3), ImageTensor(24, 20, 3), 29.191971887819, 29.162027554970, 29.185942250376,
                  0.945744186085};
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 20; ++x)
      for (int c = 0; c < 3; ++c) {
        const double r = 0.5 + 0.4 * std::sin(0.37 * x + 0.23 * y + 1.1 * c);
        f.reference(y, x, c) = r;
        f.distorted(y, x, c) = clip01(r + 0.06 * std::sin(1.3 * x - 0.7 * y + 0.5 * c));
      }
  return f;
}

inline MetricFixture chirp_rgb() {
  MetricFixture f{ImageTensor(32, 32, 3), ImageTensor(32, 32, 3), 34.491188268149, 34.497991518389, 34.501783083058,
                  0.994471975378};
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) {
        const double r = 0.5 + 0.3 * std::sin(0.05 * x * x + 0.2 * y) + 0.1 * std::cos(0.9 * y + c);
        f.reference(y, x, c) = r;
        f.distorted(y, x, c) = 0.9 * r + 0.05;
      }
  return f;
}

inline MetricFixture noisy_gray() {
  MetricFixture f{ImageTensor(16, 40, 1), ImageTensor(16, 40, 1), 25.014163015120, 24.810822787547, 25.033922047955,
                  0.983274891652};
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 40; ++x) {
      const double r = static_cast<double>((7 * x + 13 * y) % 17) / 16.0;
      double n = std::sin(12.9898 * x + 78.233 * y) * 43758.5453;
      n -= std::floor(n);
      f.reference(y, x, 0) = r;
      f.distorted(y, x, 0) = clip01(r + 0.2 * (n - 0.5));
    }
  return f;
}

/// 32x32 single-channel source for the bicubic 4x shrink fixture.
inline ImageTensor bicubic_down_source() {
  ImageTensor img(32, 32, 1);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      img(y, x, 0) = static_cast<float>(0.5 + 0.3 * std::sin(0.45 * x) + 0.2 * std::cos(0.31 * y + 0.1 * x));
  return img;
}

/// Interior rows/cols 2..5 of the 8x8 result.
inline constexpr double kBicubicDown[4][4] = {
    {0.1129043, 0.3651349, 0.7670514, 0.5057380},
    {0.3348526, 0.5868484, 0.9535264, 0.6275342},
    {0.4489222, 0.6157829, 0.8927577, 0.4866563},
    {0.3010726, 0.4128650, 0.6668079, 0.2733470},
};

/// 8x8 single-channel source for the bicubic 4x enlarge fixture.
inline ImageTensor bicubic_up_source() {
  ImageTensor img(8, 8, 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      img(y, x, 0) = static_cast<float>(0.5 + 0.3 * std::sin(0.9 * x) + 0.2 * std::cos(0.6 * y + 0.3 * x));
  return img;
}

struct Sample {
  int y;
  int x;
  double value;
};
inline constexpr Sample kBicubicUp[] = {
    {8, 8, 0.8158020}, {8, 15, 0.4519657}, {15, 20, 0.0539822}, {23, 23, 0.2302165}, {12, 17, 0.2121117},
};

}  // namespace fixtures
