#include "mrda/resize.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mrda {
namespace {

double cubic(double x) {
  const double ax = std::abs(x), ax2 = ax * ax, ax3 = ax2 * ax;
  if (ax <= 1.0) return 1.5 * ax3 - 2.5 * ax2 + 1.0;
  if (ax <= 2.0) return -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0;
  return 0.0;
}

struct Contribution {
  std::vector<int> index;
  std::vector<double> weight;
};

std::vector<Contribution> contributions(int in, int out) {
  const double scale = static_cast<double>(out) / in;
  const bool shrink = scale < 1.0;
  const double width = shrink ? 4.0 / scale : 4.0;
  const int taps = static_cast<int>(std::ceil(width)) + 2;
  std::vector<Contribution> result(static_cast<std::size_t>(out));
  for (int o = 0; o < out; ++o) {
    // 1-based output coordinate mapped into 1-based input space.
    const double u = (o + 1) / scale + 0.5 * (1.0 - 1.0 / scale);
    const int left = static_cast<int>(std::floor(u - width / 2.0));
    Contribution& c = result[static_cast<std::size_t>(o)];
    double total = 0.0;
    for (int t = 0; t < taps; ++t) {
      const int idx1 = left + t;
      const double d = u - idx1;
      const double w = shrink ? scale * cubic(scale * d) : cubic(d);
      if (w == 0.0) continue;
      // symmetric extension with edge duplication, 1-based
      int m = (idx1 - 1) % (2 * in);
      if (m < 0) m += 2 * in;
      const int src = m < in ? m : 2 * in - 1 - m;
      c.index.push_back(src);
      c.weight.push_back(w);
      total += w;
    }
    for (double& w : c.weight) w /= total;
  }
  return result;
}

}  // namespace

std::string resize_method_name(ResizeMethod m) {
  switch (m) {
    case ResizeMethod::kDecimate:
      return "decimate";
    case ResizeMethod::kBicubic:
      return "bicubic";
    case ResizeMethod::kArea:
      return "area";
  }
  return "decimate";
}

ResizeMethod parse_resize_method(const std::string& name) {
  if (name == "decimate") return ResizeMethod::kDecimate;
  if (name == "bicubic") return ResizeMethod::kBicubic;
  if (name == "area") return ResizeMethod::kArea;
  throw std::invalid_argument("unknown resize method '" + name + "'");
}

ImageTensor resize_bicubic(const ImageTensor& img, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("resize target must be positive");
  const int H = img.height(), W = img.width(), C = img.channels();
  const auto rows = contributions(H, out_h);
  ImageTensor tmp(out_h, W, C);
  for (int y = 0; y < out_h; ++y) {
    const Contribution& r = rows[static_cast<std::size_t>(y)];
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::size_t t = 0; t < r.index.size(); ++t) acc += r.weight[t] * img(r.index[t], x, c);
        tmp(y, x, c) = acc;
      }
  }
  const auto cols = contributions(W, out_w);
  ImageTensor out(out_h, out_w, C);
  out.set_color_space(img.color_space());
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      const Contribution& k = cols[static_cast<std::size_t>(x)];
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::size_t t = 0; t < k.index.size(); ++t) acc += k.weight[t] * tmp(y, k.index[t], c);
        out(y, x, c) = acc;
      }
    }
  return out;
}

namespace {
void check_divisible(const ImageTensor& img, int factor) {
  if (factor < 1) throw std::invalid_argument("downscale factor must be positive");
  if (img.height() % factor != 0 || img.width() % factor != 0) {
    throw std::invalid_argument("image " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                                " is not divisible by scale " + std::to_string(factor));
  }
}
}  // namespace

ImageTensor resize_area(const ImageTensor& img, int factor) {
  check_divisible(img, factor);
  const int h = img.height() / factor, w = img.width() / factor, C = img.channels();
  ImageTensor out(h, w, C);
  out.set_color_space(img.color_space());
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int i = 0; i < factor; ++i)
          for (int j = 0; j < factor; ++j) acc += img(y * factor + i, x * factor + j, c);
        out(y, x, c) = acc * inv;
      }
  return out;
}

ImageTensor decimate(const ImageTensor& img, int factor) {
  check_divisible(img, factor);
  const int h = img.height() / factor, w = img.width() / factor, C = img.channels();
  ImageTensor out(h, w, C);
  out.set_color_space(img.color_space());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < C; ++c) out(y, x, c) = img(y * factor, x * factor, c);
  return out;
}

ImageTensor downscale(const ImageTensor& img, int factor, ResizeMethod method) {
  check_divisible(img, factor);
  switch (method) {
    case ResizeMethod::kDecimate:
      return decimate(img, factor);
    case ResizeMethod::kArea:
      return resize_area(img, factor);
    case ResizeMethod::kBicubic:
      return resize_bicubic(img, img.height() / factor, img.width() / factor);
  }
  throw std::invalid_argument("unknown resize method");
}

}  // namespace mrda
