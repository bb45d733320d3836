#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrda/nn/layers.hpp"

namespace mrda {

struct RdanConfig {
  int channels = 64;
  int blocks = 4;
  int kernel = 3;  // dynamic depthwise kernel, odd
  int idr_dim = 256;
  int hidden = 0;  // weight-predictor hidden width; 0 means idr_dim
  int scale = 4;
};

/// Head conv, `blocks` RDA blocks (two RDA convs each, LeakyReLU after
/// both), tail conv, global residual from the head feature, upscaler.
///
/// An RDA conv named P owns P.fc0 (d -> hidden), P.fc1 (hidden -> C*k*k),
/// P.pw (1x1 pointwise, no bias) and P.mod (3x3 modulation conv).
/// Block b holds blocks.<b>.rda0 and blocks.<b>.rda1.
struct RdanModel {
  RdanConfig config;
  nn::ParamSet params;
};

RdanModel rdan_init(const RdanConfig& config, std::uint64_t seed);

/// Adds the parameters of one RDA conv layer under `prefix`.
void add_rda_conv_params(nn::ParamSet& params, const std::string& prefix, int channels, int kernel, int idr_dim,
                         int hidden, Rng& rng);

/// D: N x d -> (N*C) x 1 x k x k depthwise kernels.
template <typename T>
nn::Var predict_dynamic_weights(nn::Tape<T>& tape, const nn::ParamBinding<T>& p, const std::string& prefix,
                                nn::Var d, int channels, int kernel);

struct RdaConvVars {
  nn::Var out;         // F2 = M * F1 + F
  nn::Var f1;          // pointwise(depthwise(F, w))
  nn::Var modulation;  // M = sigmoid(conv(F))
};

template <typename T>
RdaConvVars rda_conv(nn::Tape<T>& tape, const nn::ParamBinding<T>& p, const std::string& prefix, nn::Var f,
                     nn::Var d, int kernel);

/// lr: N x 3 x h x w, d: N x idr_dim -> N x 3 x sh x sw.
template <typename T>
nn::Var rdan_forward(nn::Tape<T>& tape, const nn::ParamBinding<T>& p, const RdanConfig& config, nn::Var lr,
                     nn::Var d);

nn::Tensor<float> rdan_forward(const RdanModel& model, const nn::Tensor<float>& lr, const nn::Tensor<float>& d);

struct TransferReport {
  std::size_t copied = 0;
  std::vector<std::string> missing_in_target;
  std::vector<std::string> missing_in_source;
  std::vector<std::string> shape_mismatch;
  bool ok() const { return missing_in_target.empty() && missing_in_source.empty() && shape_mismatch.empty(); }
  std::string to_string() const;
};

/// Structural comparison of two parameter sets.
TransferReport compare_structure(const nn::ParamSet& src, const nn::ParamSet& dst);
/// Copies every entry of `src` into `dst` when both have identical structure;
/// otherwise throws std::invalid_argument carrying the report.
TransferReport transfer_weights(const nn::ParamSet& src, nn::ParamSet& dst);

}  // namespace mrda
