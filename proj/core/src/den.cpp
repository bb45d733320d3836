#include "mrda/den.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrda {

using nn::ParamBinding;
using nn::Tape;
using nn::Var;

DenModel den_init(const DenConfig& config, std::uint64_t seed) {
  if (config.in_channels < 1 || config.channels < 1 || config.dim < 1) {
    throw std::invalid_argument("DEN dimensions must be positive");
  }
  Rng rng(seed);
  DenModel m{config, {}};
  for (int i = 0; i < kDenConvs; ++i) {
    nn::add_conv_params(m.params, "conv" + std::to_string(i), config.channels, i == 0 ? config.in_channels : config.channels,
                        3, rng);
  }
  nn::add_linear_params(m.params, "fc", config.dim, config.channels, rng);
  return m;
}

template <typename T>
Var den_forward(Tape<T>& tape, const ParamBinding<T>& p, Var x) {
  const int expected = tape.value(p["conv0.weight"]).dim(1);
  if (tape.value(x).rank() != 4 || tape.value(x).dim(1) != expected) {
    throw std::invalid_argument("DEN expects " + std::to_string(expected) + " input channels, got shape " +
                                nn::shape_to_string(tape.value(x).shape()));
  }
  Var h = x;
  for (int i = 0; i < kDenConvs; ++i) {
    h = nn::conv(tape, p, "conv" + std::to_string(i), h, i % 2 == 1 ? 2 : 1);
    h = nn::leaky_relu(tape, h, T(nn::kLeakySlope));
  }
  return nn::dense(tape, p, "fc", nn::global_avg_pool(tape, h));
}

nn::Tensor<float> den_forward(const nn::ParamSet& params, const nn::Tensor<float>& x) {
  Tape<float> tape;
  ParamBinding<float> p(tape, params, nn::GradScope::kNone);
  return tape.value(den_forward(tape, p, tape.constant(x)));
}

std::vector<double> softmax_normalize(std::span<const double> v) {
  if (v.empty()) return {};
  const double mx = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += (out[i] = std::exp(v[i] - mx));
  for (double& o : out) o /= s;
  return out;
}

void copy_den_body(const nn::ParamSet& src, nn::ParamSet& dst) {
  std::string problems;
  for (const auto& e : src) {
    if (e.name == "conv0.weight") continue;
    if (!dst.contains(e.name)) {
      problems += " missing " + e.name + ";";
    } else if (dst.tensor(e.name).shape() != e.value.shape()) {
      problems += " " + e.name + " " + nn::shape_to_string(e.value.shape()) + " vs " +
                  nn::shape_to_string(dst.tensor(e.name).shape()) + ";";
    }
  }
  if (!problems.empty()) throw std::invalid_argument("DEN structure mismatch:" + problems);
  for (const auto& e : src) {
    if (e.name != "conv0.weight") dst.assign(e.name, e.value);
  }
}

template Var den_forward<float>(Tape<float>&, const ParamBinding<float>&, Var);
template Var den_forward<double>(Tape<double>&, const ParamBinding<double>&, Var);

}  // namespace mrda
