#include "mrda/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace mrda {
namespace {

cv::Mat to_mat8(const ImageTensor& img) {
  const int C = img.channels();
  cv::Mat m(img.height(), img.width(), C == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = m.ptr<unsigned char>(y);
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < C; ++c) {
        const double v = std::clamp(img(y, x, c), 0.0, 1.0);
        // OpenCV stores BGR.
        const int dst = C == 3 ? 2 - c : 0;
        row[x * C + dst] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
    }
  }
  return m;
}

ImageTensor from_mat(const cv::Mat& m) {
  const int C = m.channels();
  if (C != 1 && C != 3) throw std::runtime_error("unsupported channel count " + std::to_string(C));
  const double scale = m.depth() == CV_16U ? 1.0 / 65535.0 : 1.0 / 255.0;
  ImageTensor img(m.rows, m.cols, C);
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      for (int c = 0; c < C; ++c) {
        const int src = C == 3 ? 2 - c : 0;
        const double v = m.depth() == CV_16U ? m.ptr<unsigned short>(y)[x * C + src]
                                             : m.ptr<unsigned char>(y)[x * C + src];
        img(y, x, c) = v * scale;
      }
    }
  }
  return img;
}

}  // namespace

ImageTensor read_image(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_ANYDEPTH | cv::IMREAD_COLOR);
  if (m.empty()) throw std::runtime_error("cannot read image " + path.string());
  if (m.depth() != CV_8U && m.depth() != CV_16U) throw std::runtime_error("unsupported bit depth in " + path.string());
  return from_mat(m);
}

void write_png(const std::filesystem::path& path, const ImageTensor& img) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), to_mat8(img), {cv::IMWRITE_PNG_COMPRESSION, 6})) {
    throw std::runtime_error("cannot write image " + path.string());
  }
}

ImageTensor jpeg_roundtrip(const ImageTensor& img, int quality) {
  if (quality < 1 || quality > 100) throw std::invalid_argument("jpeg quality must be in [1,100]");
  std::vector<unsigned char> buf;
  if (!cv::imencode(".jpg", to_mat8(img), buf, {cv::IMWRITE_JPEG_QUALITY, quality})) {
    throw std::runtime_error("jpeg encode failed");
  }
  const cv::Mat dec = cv::imdecode(buf, img.channels() == 3 ? cv::IMREAD_COLOR : cv::IMREAD_GRAYSCALE);
  ImageTensor out = from_mat(dec);
  out.set_color_space(img.color_space());
  return out;
}

std::vector<ImageTensor> read_image_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ImageTensor> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(read_image(f));
  return out;
}

}  // namespace mrda
