#include "mrda/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mrda {

ImageTensor::ImageTensor(int height, int width, int channels, double fill)
    : h_(height), w_(width), c_(channels) {
  if (height < 1 || width < 1) throw std::invalid_argument("image dimensions must be positive");
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("image must have 1 or 3 channels, got " + std::to_string(channels));
  }
  space_ = channels == 1 ? ColorSpace::kY : ColorSpace::kRGB;
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

void ImageTensor::clip(double lo, double hi) {
  for (double& v : data_) v = std::clamp(v, lo, hi);
}

bool ImageTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ImageTensor crop(const ImageTensor& img, int y, int x, int h, int w) {
  if (y < 0 || x < 0 || h < 1 || w < 1 || y + h > img.height() || x + w > img.width()) {
    throw std::invalid_argument("crop window out of bounds");
  }
  ImageTensor out(h, w, img.channels());
  out.set_color_space(img.color_space());
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int c = 0; c < img.channels(); ++c) out(i, j, c) = img(y + i, x + j, c);
  return out;
}

ImageTensor augment(const ImageTensor& img, bool flip_h, bool flip_v, int quarter_turns) {
  const int H = img.height(), W = img.width(), C = img.channels();
  ImageTensor flipped(H, W, C);
  flipped.set_color_space(img.color_space());
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < C; ++c) flipped(y, x, c) = img(flip_v ? H - 1 - y : y, flip_h ? W - 1 - x : x, c);

  ImageTensor cur = flipped;
  for (int k = 0; k < ((quarter_turns % 4) + 4) % 4; ++k) {
    const int h = cur.height(), w = cur.width();
    ImageTensor rot(w, h, C);
    rot.set_color_space(img.color_space());
    // counter-clockwise: out(y, x) = in(x, w-1-y)
    for (int y = 0; y < w; ++y)
      for (int x = 0; x < h; ++x)
        for (int c = 0; c < C; ++c) rot(y, x, c) = cur(x, w - 1 - y, c);
    cur = std::move(rot);
  }
  return cur;
}

template <typename T>
nn::Tensor<T> to_tensor(std::span<const ImageTensor> images) {
  if (images.empty()) throw std::invalid_argument("to_tensor: no images");
  const int H = images[0].height(), W = images[0].width(), C = images[0].channels();
  nn::Tensor<T> t(nn::Shape{static_cast<int>(images.size()), C, H, W});
  for (std::size_t n = 0; n < images.size(); ++n) {
    const ImageTensor& img = images[n];
    if (img.height() != H || img.width() != W || img.channels() != C) {
      throw std::invalid_argument("to_tensor: images differ in shape");
    }
    for (int c = 0; c < C; ++c)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) t.at(static_cast<int>(n), c, y, x) = static_cast<T>(img(y, x, c));
  }
  return t;
}

template <typename T>
ImageTensor from_tensor(const nn::Tensor<T>& t, int n) {
  if (t.rank() != 4 || n < 0 || n >= t.dim(0)) throw std::invalid_argument("from_tensor: expected N x C x H x W");
  const int C = t.dim(1), H = t.dim(2), W = t.dim(3);
  ImageTensor img(H, W, C);
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) img(y, x, c) = static_cast<double>(t.at(n, c, y, x));
  return img;
}

template nn::Tensor<float> to_tensor<float>(std::span<const ImageTensor>);
template nn::Tensor<double> to_tensor<double>(std::span<const ImageTensor>);
template ImageTensor from_tensor<float>(const nn::Tensor<float>&, int);
template ImageTensor from_tensor<double>(const nn::Tensor<double>&, int);

}  // namespace mrda
