#pragma once

#include <string>

#include "mrda/nn/ops.hpp"
#include "mrda/nn/param_set.hpp"
#include "mrda/rng.hpp"

namespace mrda::nn {

inline constexpr double kLeakySlope = 0.1;

/// Adds `<prefix>.weight` (Cout x Cin x K x K, Kaiming fan-in init for
/// LeakyReLU 0.1) and, when requested, a zero `<prefix>.bias`.
void add_conv_params(ParamSet& params, const std::string& prefix, int cout, int cin, int k, Rng& rng,
                     bool bias = true, bool meta_mask = true);

/// Adds `<prefix>.weight` (Out x In) and zero `<prefix>.bias`.
void add_linear_params(ParamSet& params, const std::string& prefix, int out, int in, Rng& rng,
                       bool meta_mask = true);

/// conv2d using `<prefix>.weight` / optional `<prefix>.bias`, "same" padding for odd K.
template <typename T>
Var conv(Tape<T>& tape, const ParamBinding<T>& p, const std::string& prefix, Var x, int stride = 1);

template <typename T>
Var dense(Tape<T>& tape, const ParamBinding<T>& p, const std::string& prefix, Var x);

/// Number of x2 sub-pixel stages for a supported scale (2 -> 1, 4 -> 2).
int upscaler_stages(int scale);

/// Upscaler parameters: one 3x3 conv + pixel shuffle per x2 stage. Intermediate
/// stages keep `channels`; the last emits `out_channels`.
void add_upscaler_params(ParamSet& params, const std::string& prefix, int channels, int out_channels, int scale,
                         Rng& rng);

/// N x C x H x W -> N x out_channels x sH x sW.
template <typename T>
Var upscale(Tape<T>& tape, const ParamBinding<T>& p, const std::string& prefix, Var x, int scale);

}  // namespace mrda::nn
