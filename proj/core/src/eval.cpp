#include "mrda/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include "mrda/den.hpp"
#include "mrda/rdan.hpp"

namespace mrda {

using nn::Tensor;

ImageTensor rgb_to_y(const ImageTensor& img) {
  if (img.channels() != 3) throw std::invalid_argument("rgb_to_y needs 3 channels, got " + std::to_string(img.channels()));
  ImageTensor y(img.height(), img.width(), 1);
  for (int i = 0; i < img.height(); ++i)
    for (int j = 0; j < img.width(); ++j) {
      y(i, j, 0) = (65.481 * img(i, j, 0) + 128.553 * img(i, j, 1) + 24.966 * img(i, j, 2) + 16.0) / 255.0;
    }
  return y;
}

ImageTensor crop_border(const ImageTensor& img, int border) {
  if (border < 0) throw std::invalid_argument("border must be nonnegative");
  if (border == 0) return img;
  return crop(img, border, border, img.height() - 2 * border, img.width() - 2 * border);
}

namespace {

void check_same(const ImageTensor& a, const ImageTensor& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels()) {
    throw std::invalid_argument(std::string(what) + ": image shapes differ");
  }
}

ImageTensor luma(const ImageTensor& img) { return img.channels() == 3 ? rgb_to_y(img) : img; }

// Separable "valid" filtering with a normalized 11-tap Gaussian.
std::vector<double> gauss_valid(const std::vector<double>& src, int h, int w, const std::vector<double>& g) {
  const int k = static_cast<int>(g.size());
  const int oh = h - k + 1, ow = w - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(oh) * w), out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += g[i] * src[static_cast<std::size_t>(y + i) * w + x];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int j = 0; j < k; ++j) acc += g[j] * tmp[static_cast<std::size_t>(y) * w + x + j];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  return out;
}

}  // namespace

double psnr(const ImageTensor& a, const ImageTensor& b, int border_crop) {
  check_same(a, b, "psnr");
  const ImageTensor ya = crop_border(luma(a), border_crop);
  const ImageTensor yb = crop_border(luma(b), border_crop);
  double mse = 0.0;
  for (std::size_t i = 0; i < ya.size(); ++i) {
    const double d = ya.values()[i] - yb.values()[i];
    mse += d * d;
  }
  mse /= static_cast<double>(ya.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const ImageTensor& a, const ImageTensor& b) {
  check_same(a, b, "ssim");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5, kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;
  const ImageTensor ya = luma(a), yb = luma(b);
  const int h = ya.height(), w = ya.width();
  if (h < kWin || w < kWin) throw std::invalid_argument("ssim needs images of at least 11x11");

  std::vector<double> g(kWin);
  double gs = 0.0;
  for (int i = 0; i < kWin; ++i) gs += (g[i] = std::exp(-0.5 * std::pow((i - kWin / 2) / kSigma, 2)));
  for (double& v : g) v /= gs;

  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ya.values()[i];
    y[i] = yb.values()[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto ux = gauss_valid(x, h, w, g), uy = gauss_valid(y, h, w, g);
  const auto uxx = gauss_valid(xx, h, w, g), uyy = gauss_valid(yy, h, w, g), uxy = gauss_valid(xy, h, w, g);
  double total = 0.0;
  for (std::size_t i = 0; i < ux.size(); ++i) {
    const double vx = uxx[i] - ux[i] * ux[i];
    const double vy = uyy[i] - uy[i] * uy[i];
    const double vxy = uxy[i] - ux[i] * uy[i];
    total += ((2 * ux[i] * uy[i] + kC1) * (2 * vxy + kC2)) /
             ((ux[i] * ux[i] + uy[i] * uy[i] + kC1) * (vx + vy + kC2));
  }
  return total / static_cast<double>(ux.size());
}

double MetricReport::mean_psnr() const {
  double s = 0.0;
  for (const auto& r : rows) s += r.psnr;
  return rows.empty() ? 0.0 : s / double(rows.size());
}

double MetricReport::mean_ssim() const {
  double s = 0.0;
  for (const auto& r : rows) s += r.ssim;
  return rows.empty() ? 0.0 : s / double(rows.size());
}

void MetricReport::write_csv(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char buf[128];
  out << "label,images,psnr,ssim\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f", r.image_psnr.size(), r.psnr, r.ssim);
    out << r.label << "," << buf << "\n";
  }
  std::snprintf(buf, sizeof(buf), "%.6f,%.6f", mean_psnr(), mean_ssim());
  out << "aggregate," << rows.size() << "," << buf << "\n";
}

void MetricReport::write_json(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  nlohmann::json j;
  j["dataset"] = dataset;
  j["checkpoint_hash"] = checkpoint_hash;
  j["border_crop"] = border_crop;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"label", r.label},
                         {"spec", r.spec},
                         {"image_psnr", r.image_psnr},
                         {"image_ssim", r.image_ssim},
                         {"psnr", r.psnr},
                         {"ssim", r.ssim}});
  }
  j["aggregate"] = {{"psnr", mean_psnr()}, {"ssim", mean_ssim()}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

ImageTensor super_resolve(const StudentModel& student, const ImageTensor& lr) {
  const Tensor<float> x = to_tensor<float>(lr);
  const Tensor<float> d = den_forward(student.den.params, x);
  ImageTensor sr = from_tensor(rdan_forward(student.rdan, x, d));
  sr.clip();
  return sr;
}

MetricReport evaluate_student(const StudentModel& student, const std::vector<ImageTensor>& hr_images,
                              const std::vector<DegradationSpec>& specs, const std::string& dataset,
                              const std::string& checkpoint_hash, int workers) {
  if (hr_images.empty() || specs.empty()) throw std::invalid_argument("evaluation needs images and degradations");
  MetricReport report{dataset, checkpoint_hash, specs.front().scale, {}};
  const std::size_t jobs = specs.size() * hr_images.size();
  std::vector<double> p(jobs), s(jobs);
  auto run = [&](std::size_t job) {
    const DegradationSpec& spec = specs[job / hr_images.size()];
    const std::size_t i = job % hr_images.size();
    DegradationSpec per = spec;
    per.rng_seed = Rng::derive(spec.rng_seed, i);
    const ImageTensor& full = hr_images[i];
    const ImageTensor hr = crop(full, 0, 0, full.height() - full.height() % spec.scale,
                                full.width() - full.width() % spec.scale);
    const ImageTensor sr = super_resolve(student, degrade(hr, per));
    p[job] = psnr(sr, hr, spec.scale);
    s[job] = ssim(crop_border(sr, spec.scale), crop_border(hr, spec.scale));
  };
  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs)));
  if (n_workers == 1) {
    for (std::size_t j = 0; j < jobs; ++j) run(j);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t j = static_cast<std::size_t>(w); j < jobs; j += static_cast<std::size_t>(n_workers)) run(j);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (std::size_t k = 0; k < specs.size(); ++k) {
    MetricRow row{degradation_label(specs[k]), to_json(specs[k]), {}, {}, 0.0, 0.0};
    for (std::size_t i = 0; i < hr_images.size(); ++i) {
      row.image_psnr.push_back(p[k * hr_images.size() + i]);
      row.image_ssim.push_back(s[k * hr_images.size() + i]);
      row.psnr += row.image_psnr.back() / double(hr_images.size());
      row.ssim += row.image_ssim.back() / double(hr_images.size());
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string degradation_label(const DegradationSpec& spec) {
  char buf[128];
  switch (spec.kernel.kind) {
    case KernelSpec::Kind::kDelta:
      std::snprintf(buf, sizeof(buf), "delta");
      break;
    case KernelSpec::Kind::kIsotropic:
      std::snprintf(buf, sizeof(buf), "iso_%.3f", spec.kernel.sigma);
      break;
    case KernelSpec::Kind::kAnisotropic:
      std::snprintf(buf, sizeof(buf), "aniso_%.3f_%.3f_%.3f", spec.kernel.lambda1, spec.kernel.lambda2,
                    spec.kernel.theta);
      break;
  }
  std::string label = buf;
  if (spec.noise_sigma > 0) {
    std::snprintf(buf, sizeof(buf), "_n%g", spec.noise_sigma);
    label += buf;
  }
  if (spec.jpeg_quality) label += "_q" + std::to_string(*spec.jpeg_quality);
  return label;
}

namespace {

template <typename Fn>
std::vector<IdrRow> export_rows(const std::vector<ImageTensor>& hr_images, const std::vector<DegradationSpec>& grid,
                                Fn&& idr_of) {
  if (grid.size() < 2) throw std::invalid_argument("IDR export needs at least two degradations");
  std::vector<IdrRow> rows;
  for (const DegradationSpec& spec : grid) {
    for (std::size_t i = 0; i < hr_images.size(); ++i) {
      DegradationSpec per = spec;
      per.rng_seed = Rng::derive(spec.rng_seed, i);
      const ImageTensor& full = hr_images[i];
      const ImageTensor hr = crop(full, 0, 0, full.height() - full.height() % spec.scale,
                                  full.width() - full.width() % spec.scale);
      const Tensor<float> d = idr_of(degrade(hr, per), hr);
      rows.push_back({"img" + std::to_string(i), degradation_label(spec), to_json(spec),
                      std::vector<double>(d.values().begin(), d.values().end())});
    }
  }
  return rows;
}

}  // namespace

std::vector<IdrRow> export_idr_student(const DenModel& den_s, const std::vector<ImageTensor>& hr_images,
                                       const std::vector<DegradationSpec>& grid) {
  return export_rows(hr_images, grid, [&](const ImageTensor& lr, const ImageTensor&) {
    return den_forward(den_s.params, to_tensor<float>(lr));
  });
}

std::vector<IdrRow> export_idr_teacher(const TrainConfig& c, const MlnModel& mln, const DenModel& den_t,
                                       const std::vector<ImageTensor>& hr_images,
                                       const std::vector<DegradationSpec>& grid) {
  return export_rows(hr_images, grid, [&](const ImageTensor& lr, const ImageTensor& hr) {
    const Pairs pair{to_tensor<float>(lr), to_tensor<float>(hr)};
    return teacher_idr(c, mln, den_t, pair);
  });
}

void write_idr_jsonl(const std::filesystem::path& path, const std::vector<IdrRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : rows) {
    out << nlohmann::json{{"image_id", r.image_id}, {"label", r.label}, {"spec", r.spec}, {"d", r.d}}.dump() << "\n";
  }
}

std::vector<IdrRow> read_idr_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<IdrRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    rows.push_back({j.at("image_id").get<std::string>(), j.at("label").get<std::string>(), j.value("spec", nlohmann::json{}),
                    j.at("d").get<std::vector<double>>()});
  }
  return rows;
}

double separability_score(const std::vector<std::vector<double>>& points, const std::vector<std::string>& labels) {
  if (points.size() != labels.size()) throw std::invalid_argument("points and labels differ in count");
  // Canonical order so the floating-point result ignores input order.
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return labels[a] != labels[b] ? labels[a] < labels[b] : points[a] < points[b];
  });
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i : order) groups[labels[i]].push_back(i);
  if (groups.size() < 2) throw std::invalid_argument("separability needs at least two labels");
  for (const auto& [l, g] : groups) {
    if (g.size() < 2) throw std::invalid_argument("label '" + l + "' has fewer than two points");
  }
  const std::size_t dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw std::invalid_argument("points differ in dimension");

  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) s += (points[a][k] - points[b][k]) * (points[a][k] - points[b][k]);
    return std::sqrt(s);
  };
  double total = 0.0;
  for (const auto& [label, members] : groups) {
    for (std::size_t i : members) {
      double a = 0.0;
      for (std::size_t j : members)
        if (j != i) a += dist(i, j);
      a /= double(members.size() - 1);
      double b = std::numeric_limits<double>::infinity();
      for (const auto& [other, om] : groups) {
        if (other == label) continue;
        double m = 0.0;
        for (std::size_t j : om) m += dist(i, j);
        b = std::min(b, m / double(om.size()));
      }
      const double den = std::max(a, b);
      total += den > 0.0 ? (b - a) / den : 0.0;
    }
  }
  return total / double(points.size());
}

double separability_score(const std::vector<IdrRow>& rows) {
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  for (const auto& r : rows) {
    pts.push_back(r.d);
    labels.push_back(r.label);
  }
  return separability_score(pts, labels);
}

double separability_score(const std::filesystem::path& export_file) {
  return separability_score(read_idr_jsonl(export_file));
}

std::vector<std::pair<int, double>> adaptation_curve(const nn::ParamSet& params, int scale,
                                                     const std::vector<TaskBatch>& tasks, int max_steps,
                                                     double alpha) {
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (tasks.empty()) throw std::invalid_argument("adaptation curve needs tasks");
  std::vector<double> mean(static_cast<std::size_t>(max_steps) + 1, 0.0);
  for (const TaskBatch& t : tasks) {
    nn::ParamSet theta = params;
    for (int k = 0; k <= max_steps; ++k) {
      const Tensor<float> sr = mln_forward(theta, t.query.lr, scale).sr;
      double acc = 0.0;
      for (int n = 0; n < t.query.size(); ++n) {
        ImageTensor s = from_tensor(sr, n);
        s.clip();
        acc += psnr(s, from_tensor(t.query.hr, n), scale);
      }
      mean[static_cast<std::size_t>(k)] += acc / t.query.size() / double(tasks.size());
      if (k < max_steps) theta = inner_adapt(theta, t.support, scale, 1, float(alpha));
    }
  }
  std::vector<std::pair<int, double>> curve;
  for (int k = 0; k <= max_steps; ++k) curve.emplace_back(k, mean[static_cast<std::size_t>(k)]);
  return curve;
}

}  // namespace mrda
