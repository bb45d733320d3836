#include "mrda/hr_source.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mrda/image_io.hpp"

namespace mrda {

ImageTensor synth_hr_image(int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  ImageTensor img(height, width, 3);
  auto color = [&] { return std::array<double, 3>{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)}; };

  const auto c0 = color(), c1 = color();
  const double gx = rng.uniform(-1.0, 1.0), gy = rng.uniform(-1.0, 1.0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double t = 0.5 + 0.5 * std::tanh(gx * (x / double(width) - 0.5) + gy * (y / double(height) - 0.5));
      for (int c = 0; c < 3; ++c) img(y, x, c) = c0[c] * (1 - t) + c1[c] * t;
    }

  const int shapes = 4 + rng.uniform_int(0, 6);
  for (int s = 0; s < shapes; ++s) {
    const auto col = color();
    const double cy = rng.uniform(0, height), cx = rng.uniform(0, width);
    const double ry = rng.uniform(0.08, 0.35) * height, rx = rng.uniform(0.08, 0.35) * width;
    const int kind = rng.uniform_int(0, 2);
    const double freq = rng.uniform(0.25, 1.2);
    const double ang = rng.uniform(0.0, std::numbers::pi);
    const double ca = std::cos(ang), sa = std::sin(ang);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double dy = (y - cy) / ry, dx = (x - cx) / rx;
        bool inside = false;
        double alpha = 1.0;
        switch (kind) {
          case 0:  // rectangle
            inside = std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
            break;
          case 1:  // ellipse
            inside = dx * dx + dy * dy <= 1.0;
            break;
          default:  // square-wave grating inside a rectangle
            inside = std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
            alpha = std::sin(freq * (ca * x + sa * y)) > 0 ? 1.0 : 0.0;
            break;
        }
        if (!inside || alpha == 0.0) continue;
        for (int c = 0; c < 3; ++c) img(y, x, c) = col[c];
      }
  }
  // Multi-octave value noise over the whole image so every region carries
  // fine detail, roughly following a 1/f amplitude spectrum.
  std::vector<double> tex(static_cast<std::size_t>(height) * width, 0.0);
  for (int cell = 2; cell <= 32; cell *= 2) {
    const int gh = height / cell + 2, gw = width / cell + 2;
    std::vector<double> grid(static_cast<std::size_t>(gh) * gw);
    for (auto& g : grid) g = rng.uniform(-1.0, 1.0);
    const double amp = 0.03 * std::sqrt(double(cell));
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double fy = double(y) / cell, fx = double(x) / cell;
        const int iy = int(fy), ix = int(fx);
        const double ty = fy - iy, tx = fx - ix;
        auto at = [&](int a, int b) { return grid[static_cast<std::size_t>(a) * gw + b]; };
        const double v = (1 - ty) * ((1 - tx) * at(iy, ix) + tx * at(iy, ix + 1)) +
                         ty * ((1 - tx) * at(iy + 1, ix) + tx * at(iy + 1, ix + 1));
        tex[static_cast<std::size_t>(y) * width + x] += amp * v;
      }
  }
  const auto tint = std::array<double, 3>{rng.uniform(0.7, 1.0), rng.uniform(0.7, 1.0), rng.uniform(0.7, 1.0)};
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) img(y, x, c) += tint[c] * tex[static_cast<std::size_t>(y) * width + x];
  img.clip();
  return img;
}

HrSource::HrSource(std::vector<ImageTensor> images) : images_(std::move(images)) {
  if (images_.empty()) throw std::invalid_argument("HR source holds no images");
  for (const auto& im : images_) {
    if (im.channels() != 3) throw std::invalid_argument("HR images must be RGB");
  }
}

HrSource HrSource::synthetic(int count, int size, std::uint64_t seed) {
  if (count < 1 || size < 1) throw std::invalid_argument("synthetic source needs positive count and size");
  std::vector<ImageTensor> images;
  images.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) images.push_back(synth_hr_image(size, size, Rng::derive(seed, static_cast<std::uint64_t>(i))));
  return HrSource(std::move(images));
}

HrSource HrSource::from_directory(const std::filesystem::path& dir) { return HrSource(read_image_dir(dir)); }

ImageTensor HrSource::sample_patch(int patch, Rng& rng, bool augment_patch) const {
  const auto& img = images_[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(images_.size()) - 1))];
  if (img.height() < patch || img.width() < patch) {
    throw std::invalid_argument("HR image smaller than patch size " + std::to_string(patch));
  }
  const int y = rng.uniform_int(0, img.height() - patch);
  const int x = rng.uniform_int(0, img.width() - patch);
  ImageTensor p = crop(img, y, x, patch, patch);
  if (!augment_patch) return p;
  const bool fh = rng.uniform_int(0, 1) == 1;
  const bool fv = rng.uniform_int(0, 1) == 1;
  const int k = rng.uniform_int(0, 3);
  return augment(p, fh, fv, k);
}

}  // namespace mrda
