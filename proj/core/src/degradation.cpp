#include "mrda/degradation.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

#include "mrda/image_io.hpp"

namespace mrda {
namespace {

// Reflect-101 index for any integer, handling reflections past both edges.
int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

void check_scale(int scale) {
  if (scale != 2 && scale != 4) throw std::invalid_argument("scale must be 2 or 4, got " + std::to_string(scale));
}

// Convolution evaluated at rows/cols 0, step, 2*step, ...
ImageTensor convolve_strided(const ImageTensor& img, const BlurKernel& k, int step) {
  const int H = img.height(), W = img.width(), C = img.channels();
  const int h = H / step, w = W / step, r = k.size / 2;
  ImageTensor out(h, w, C);
  out.set_color_space(img.color_space());
  for (int oy = 0; oy < h; ++oy) {
    for (int ox = 0; ox < w; ++ox) {
      const int y = oy * step, x = ox * step;
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int i = 0; i < k.size; ++i) {
          const int sy = reflect(y - (i - r), H);
          for (int j = 0; j < k.size; ++j) acc += k(i, j) * img(sy, reflect(x - (j - r), W), c);
        }
        out(oy, ox, c) = acc;
      }
    }
  }
  return out;
}

void add_noise(ImageTensor& img, double sigma, Rng& rng) {
  if (sigma <= 0.0) return;
  const double s = sigma / 255.0;
  for (double& v : img.values()) v += rng.normal(0.0, s);
}

}  // namespace

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::kBlur:
      return "blur";
    case Stage::kDownsample:
      return "downsample";
    case Stage::kNoise:
      return "noise";
    case Stage::kJpeg:
      return "jpeg";
  }
  return "blur";
}

Stage parse_stage(const std::string& name) {
  if (name == "blur") return Stage::kBlur;
  if (name == "downsample") return Stage::kDownsample;
  if (name == "noise") return Stage::kNoise;
  if (name == "jpeg") return Stage::kJpeg;
  throw std::invalid_argument("unknown pipeline stage '" + name + "'");
}

std::string mode_name(DegradationMode m) {
  switch (m) {
    case DegradationMode::kClassicIso:
      return "classic_iso";
    case DegradationMode::kClassicAnisoNoise:
      return "classic_aniso_noise";
    case DegradationMode::kRealworld:
      return "realworld";
  }
  return "classic_iso";
}

DegradationMode parse_mode(const std::string& name) {
  if (name == "classic_iso") return DegradationMode::kClassicIso;
  if (name == "classic_aniso_noise") return DegradationMode::kClassicAnisoNoise;
  if (name == "realworld") return DegradationMode::kRealworld;
  throw std::invalid_argument("unknown degradation mode '" + name + "'");
}

nlohmann::json to_json(const DegradationSpec& spec) {
  nlohmann::json j;
  j["kernel"] = {{"kind", kind_name(spec.kernel.kind)},
                 {"sigma", spec.kernel.sigma},
                 {"lambda1", spec.kernel.lambda1},
                 {"lambda2", spec.kernel.lambda2},
                 {"theta", spec.kernel.theta}};
  j["kernel_size"] = spec.kernel_size;
  j["scale"] = spec.scale;
  j["noise_sigma"] = spec.noise_sigma;
  j["jpeg_quality"] = spec.jpeg_quality ? nlohmann::json(*spec.jpeg_quality) : nlohmann::json(nullptr);
  j["op_order"] = nlohmann::json::array();
  for (Stage s : spec.op_order) j["op_order"].push_back(stage_name(s));
  j["resize_method"] = resize_method_name(spec.resize_method);
  j["second_pass"] = spec.second_pass;
  j["rng_seed"] = spec.rng_seed;
  return j;
}

DegradationSpec spec_from_json(const nlohmann::json& j) {
  DegradationSpec s;
  const auto& k = j.at("kernel");
  s.kernel.kind = parse_kind(k.at("kind").get<std::string>());
  s.kernel.sigma = k.value("sigma", 0.0);
  s.kernel.lambda1 = k.value("lambda1", 0.0);
  s.kernel.lambda2 = k.value("lambda2", 0.0);
  s.kernel.theta = k.value("theta", 0.0);
  s.kernel_size = j.value("kernel_size", kDefaultKernelSize);
  s.scale = j.at("scale").get<int>();
  s.noise_sigma = j.value("noise_sigma", 0.0);
  if (j.contains("jpeg_quality") && !j["jpeg_quality"].is_null()) s.jpeg_quality = j["jpeg_quality"].get<int>();
  if (j.contains("op_order")) {
    for (const auto& n : j["op_order"]) s.op_order.push_back(parse_stage(n.get<std::string>()));
  }
  s.resize_method = parse_resize_method(j.value("resize_method", std::string("decimate")));
  s.second_pass = j.value("second_pass", false);
  s.rng_seed = j.value("rng_seed", std::uint64_t{0});
  return s;
}

ImageTensor blur(const ImageTensor& img, const BlurKernel& kernel) { return convolve_strided(img, kernel, 1); }

ImageTensor degrade_classic(const ImageTensor& hr, const DegradationSpec& spec) {
  check_scale(spec.scale);
  if (hr.height() % spec.scale != 0 || hr.width() % spec.scale != 0) {
    throw std::invalid_argument("HR size " + std::to_string(hr.height()) + "x" + std::to_string(hr.width()) +
                                " is not divisible by scale " + std::to_string(spec.scale));
  }
  if (spec.noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be nonnegative");
  ImageTensor lr = convolve_strided(hr, make_kernel(spec.kernel, spec.kernel_size), spec.scale);
  Rng rng(spec.rng_seed);
  add_noise(lr, spec.noise_sigma, rng);
  lr.clip();
  return lr;
}

ImageTensor degrade_realworld(const ImageTensor& hr, const DegradationSpec& spec) {
  check_scale(spec.scale);
  if (spec.noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be nonnegative");
  std::vector<Stage> sorted = spec.op_order;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("op_order repeats a stage");
  }
  const BlurKernel kernel = make_kernel(spec.kernel, spec.kernel_size);
  Rng rng(spec.rng_seed);

  ImageTensor img = hr;
  auto run = [&](bool first_pass) {
    for (Stage s : spec.op_order) {
      switch (s) {
        case Stage::kBlur:
          img = blur(img, kernel);
          break;
        case Stage::kDownsample:
          if (first_pass) img = downscale(img, spec.scale, spec.resize_method);
          break;
        case Stage::kNoise:
          add_noise(img, spec.noise_sigma, rng);
          break;
        case Stage::kJpeg:
          if (!spec.jpeg_quality) throw std::invalid_argument("jpeg stage requires jpeg_quality");
          img.clip();
          img = jpeg_roundtrip(img, *spec.jpeg_quality);
          break;
      }
    }
  };
  run(true);
  if (spec.second_pass) run(false);
  img.clip();
  return img;
}

ImageTensor degrade(const ImageTensor& hr, const DegradationSpec& spec) {
  return spec.op_order.empty() ? degrade_classic(hr, spec) : degrade_realworld(hr, spec);
}

WidthRange training_width_range(int scale) {
  check_scale(scale);
  return scale == 2 ? WidthRange{0.2, 2.0} : WidthRange{0.2, 4.0};
}

DegradationSpec sample_degradation(DegradationMode mode, int scale, Rng& rng, const SamplerConfig& cfg) {
  check_scale(scale);
  DegradationSpec spec;
  spec.scale = scale;
  spec.kernel_size = cfg.kernel_size;
  auto draw_aniso = [&] {
    const double l1 = rng.uniform(cfg.aniso_lambda_lo, cfg.aniso_lambda_hi);
    const double l2 = rng.uniform(cfg.aniso_lambda_lo, cfg.aniso_lambda_hi);
    const double theta = rng.uniform(0.0, std::numbers::pi);
    return KernelSpec::anisotropic(l1, l2, theta);
  };
  switch (mode) {
    case DegradationMode::kClassicIso: {
      const WidthRange r = training_width_range(scale);
      spec.kernel = KernelSpec::isotropic(rng.uniform(r.lo, r.hi));
      break;
    }
    case DegradationMode::kClassicAnisoNoise: {
      spec.kernel = draw_aniso();
      if (cfg.aniso_noise_levels.empty()) throw std::invalid_argument("no noise levels configured");
      const int pick = rng.uniform_int(0, static_cast<int>(cfg.aniso_noise_levels.size()) - 1);
      spec.noise_sigma = cfg.aniso_noise_levels[static_cast<std::size_t>(pick)];
      break;
    }
    case DegradationMode::kRealworld: {
      if (rng.uniform(0.0, 1.0) < 0.5) {
        const WidthRange r = training_width_range(scale);
        spec.kernel = KernelSpec::isotropic(rng.uniform(r.lo, r.hi));
      } else {
        spec.kernel = draw_aniso();
      }
      spec.noise_sigma = rng.uniform(0.0, cfg.realworld_noise_max);
      spec.jpeg_quality = rng.uniform_int(cfg.jpeg_quality_lo, cfg.jpeg_quality_hi);
      spec.op_order = {Stage::kBlur, Stage::kDownsample, Stage::kNoise, Stage::kJpeg};
      std::shuffle(spec.op_order.begin(), spec.op_order.end(), rng.engine());
      spec.resize_method = static_cast<ResizeMethod>(rng.uniform_int(0, 2));
      spec.second_pass = cfg.realworld_second_pass;
      break;
    }
  }
  spec.rng_seed = rng.next();
  return spec;
}

}  // namespace mrda
