#include "mrda/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace mrda::nn {

void add_conv_params(ParamSet& params, const std::string& prefix, int cout, int cin, int k, Rng& rng, bool bias,
                     bool meta_mask) {
  const double fan_in = static_cast<double>(cin) * k * k;
  const double gain = std::sqrt(2.0 / (1.0 + kLeakySlope * kLeakySlope));
  const double stddev = gain / std::sqrt(fan_in);
  Tensor<float> w(Shape{cout, cin, k, k});
  for (float& v : w.values()) v = static_cast<float>(rng.normal(0.0, stddev));
  params.add(prefix + ".weight", std::move(w), meta_mask);
  if (bias) params.add(prefix + ".bias", Tensor<float>(Shape{cout}), meta_mask);
}

void add_linear_params(ParamSet& params, const std::string& prefix, int out, int in, Rng& rng, bool meta_mask) {
  const double gain = std::sqrt(2.0 / (1.0 + kLeakySlope * kLeakySlope));
  const double stddev = gain / std::sqrt(static_cast<double>(in));
  Tensor<float> w(Shape{out, in});
  for (float& v : w.values()) v = static_cast<float>(rng.normal(0.0, stddev));
  params.add(prefix + ".weight", std::move(w), meta_mask);
  params.add(prefix + ".bias", Tensor<float>(Shape{out}), meta_mask);
}

template <typename T>
Var conv(Tape<T>& tape, const ParamBinding<T>& p, const std::string& prefix, Var x, int stride) {
  const Var w = p[prefix + ".weight"];
  const Var b = p.contains(prefix + ".bias") ? p[prefix + ".bias"] : Var{};
  const int k = tape.value(w).dim(2);
  return conv2d(tape, x, w, b, stride, k / 2);
}

template <typename T>
Var dense(Tape<T>& tape, const ParamBinding<T>& p, const std::string& prefix, Var x) {
  return linear(tape, x, p[prefix + ".weight"], p[prefix + ".bias"]);
}

int upscaler_stages(int scale) {
  switch (scale) {
    case 2:
      return 1;
    case 4:
      return 2;
    default:
      throw std::invalid_argument("unsupported upscale factor " + std::to_string(scale) + " (expected 2 or 4)");
  }
}

void add_upscaler_params(ParamSet& params, const std::string& prefix, int channels, int out_channels, int scale,
                         Rng& rng) {
  const int stages = upscaler_stages(scale);
  for (int s = 0; s < stages; ++s) {
    const int out = (s + 1 == stages) ? out_channels : channels;
    add_conv_params(params, prefix + "." + std::to_string(s), out * 4, channels, 3, rng);
  }
}

template <typename T>
Var upscale(Tape<T>& tape, const ParamBinding<T>& p, const std::string& prefix, Var x, int scale) {
  const int stages = upscaler_stages(scale);
  Var h = x;
  for (int s = 0; s < stages; ++s) {
    h = conv(tape, p, prefix + "." + std::to_string(s), h);
    h = pixel_shuffle(tape, h, 2);
  }
  return h;
}

template Var conv<float>(Tape<float>&, const ParamBinding<float>&, const std::string&, Var, int);
template Var conv<double>(Tape<double>&, const ParamBinding<double>&, const std::string&, Var, int);
template Var dense<float>(Tape<float>&, const ParamBinding<float>&, const std::string&, Var);
template Var dense<double>(Tape<double>&, const ParamBinding<double>&, const std::string&, Var);
template Var upscale<float>(Tape<float>&, const ParamBinding<float>&, const std::string&, Var, int);
template Var upscale<double>(Tape<double>&, const ParamBinding<double>&, const std::string&, Var, int);

}  // namespace mrda::nn
