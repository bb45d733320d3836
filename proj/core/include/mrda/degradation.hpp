#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrda/image.hpp"
#include "mrda/kernels.hpp"
#include "mrda/resize.hpp"
#include "mrda/rng.hpp"

namespace mrda {

enum class Stage { kBlur, kDownsample, kNoise, kJpeg };

std::string stage_name(Stage s);
Stage parse_stage(const std::string& name);

enum class DegradationMode { kClassicIso, kClassicAnisoNoise, kRealworld };

std::string mode_name(DegradationMode m);
/// Accepts classic_iso, classic_aniso_noise, realworld.
DegradationMode parse_mode(const std::string& name);

struct DegradationSpec {
  KernelSpec kernel;
  int kernel_size = kDefaultKernelSize;
  int scale = 4;
  /// Standard deviation in 8-bit units; noise is N(0, (sigma/255)^2) on [0,1] data.
  double noise_sigma = 0.0;
  std::optional<int> jpeg_quality;
  /// Real-world pipeline only.
  std::vector<Stage> op_order;
  ResizeMethod resize_method = ResizeMethod::kDecimate;
  /// Real-world pipeline only: repeat every stage except downsampling once more.
  bool second_pass = false;
  std::uint64_t rng_seed = 0;

  bool operator==(const DegradationSpec&) const = default;
};

nlohmann::json to_json(const DegradationSpec& spec);
DegradationSpec spec_from_json(const nlohmann::json& j);

/// Full-resolution convolution with reflect (mirror without edge repeat) padding.
ImageTensor blur(const ImageTensor& img, const BlurKernel& kernel);

/// (hr conv k) subsampled from offset 0, plus Gaussian noise, clipped to [0,1].
ImageTensor degrade_classic(const ImageTensor& hr, const DegradationSpec& spec);

/// Applies the stages of spec.op_order in sequence, then clips to [0,1].
ImageTensor degrade_realworld(const ImageTensor& hr, const DegradationSpec& spec);

/// Dispatches on whether the spec carries a stage order.
ImageTensor degrade(const ImageTensor& hr, const DegradationSpec& spec);

struct SamplerConfig {
  int kernel_size = kDefaultKernelSize;
  std::vector<double> aniso_noise_levels{0.0, 10.0, 20.0, 25.0};
  double aniso_lambda_lo = 0.2;
  double aniso_lambda_hi = 4.0;
  double realworld_noise_max = 25.0;
  int jpeg_quality_lo = 30;
  int jpeg_quality_hi = 95;
  bool realworld_second_pass = false;
};

/// Isotropic width range for training: [0.2, 2.0] (x2) or [0.2, 4.0] (x4).
WidthRange training_width_range(int scale);

DegradationSpec sample_degradation(DegradationMode mode, int scale, Rng& rng, const SamplerConfig& cfg = {});

}  // namespace mrda
