#pragma once

#include <span>
#include <vector>

#include "mrda/nn/tensor.hpp"

namespace mrda {

enum class ColorSpace { kRGB, kY };

/// H x W x C image, channel-interleaved, values nominally in [0,1].
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(int height, int width, int channels, double fill = 0.0);

  int height() const { return h_; }
  int width() const { return w_; }
  int channels() const { return c_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  ColorSpace color_space() const { return space_; }
  void set_color_space(ColorSpace s) { space_ = s; }

  double& operator()(int y, int x, int c) { return data_[(static_cast<std::size_t>(y) * w_ + x) * c_ + c]; }
  double operator()(int y, int x, int c) const { return data_[(static_cast<std::size_t>(y) * w_ + x) * c_ + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void clip(double lo = 0.0, double hi = 1.0);
  bool all_finite() const;

  bool operator==(const ImageTensor& other) const = default;

 private:
  int h_ = 0;
  int w_ = 0;
  int c_ = 0;
  ColorSpace space_ = ColorSpace::kRGB;
  std::vector<double> data_;
};

ImageTensor crop(const ImageTensor& img, int y, int x, int h, int w);

/// Dihedral augmentation: optional flips, then k quarter turns counter-clockwise.
ImageTensor augment(const ImageTensor& img, bool flip_h, bool flip_v, int quarter_turns);

/// Stacks equally sized images into an N x C x H x W tensor.
template <typename T>
nn::Tensor<T> to_tensor(std::span<const ImageTensor> images);
template <typename T>
nn::Tensor<T> to_tensor(const ImageTensor& image) {
  return to_tensor<T>(std::span<const ImageTensor>(&image, 1));
}

/// Sample n of an N x C x H x W tensor as an image (no clipping).
template <typename T>
ImageTensor from_tensor(const nn::Tensor<T>& t, int n = 0);

}  // namespace mrda
