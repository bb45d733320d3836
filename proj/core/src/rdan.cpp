#include "mrda/rdan.hpp"

#include <sstream>
#include <stdexcept>

namespace mrda {

using nn::ParamBinding;
using nn::Tape;
using nn::Var;

namespace {

// Residual branches start small so stacked blocks stay near identity.
constexpr float kResidualInitScale = 0.1f;

void scale_entry(nn::ParamSet& params, const std::string& name, float f) {
  nn::Tensor<float> t = params.tensor(name);
  for (auto& v : t.values()) v *= f;
  params.assign(name, t);
}

}  // namespace

void add_rda_conv_params(nn::ParamSet& params, const std::string& prefix, int channels, int kernel, int idr_dim,
                         int hidden, Rng& rng) {
  nn::add_linear_params(params, prefix + ".fc0", hidden, idr_dim, rng);
  nn::add_linear_params(params, prefix + ".fc1", channels * kernel * kernel, hidden, rng);
  nn::add_conv_params(params, prefix + ".pw", channels, channels, 1, rng, /*bias=*/false);
  scale_entry(params, prefix + ".pw.weight", kResidualInitScale);
  nn::add_conv_params(params, prefix + ".mod", channels, channels, 3, rng);
}

RdanModel rdan_init(const RdanConfig& config, std::uint64_t seed) {
  if (config.channels < 1 || config.blocks < 1 || config.idr_dim < 1) {
    throw std::invalid_argument("RDAN needs positive channels, blocks and IDR length");
  }
  if (config.kernel < 1 || config.kernel % 2 == 0) throw std::invalid_argument("dynamic kernel size must be odd");
  nn::upscaler_stages(config.scale);
  const int hidden = config.hidden > 0 ? config.hidden : config.idr_dim;
  Rng rng(seed);
  RdanModel m{config, {}};
  nn::add_conv_params(m.params, "head", config.channels, 3, 3, rng);
  for (int b = 0; b < config.blocks; ++b) {
    for (int j = 0; j < 2; ++j) {
      add_rda_conv_params(m.params, "blocks." + std::to_string(b) + ".rda" + std::to_string(j), config.channels,
                          config.kernel, config.idr_dim, hidden, rng);
    }
  }
  nn::add_conv_params(m.params, "tail", config.channels, config.channels, 3, rng);
  scale_entry(m.params, "tail.weight", kResidualInitScale);
  nn::add_upscaler_params(m.params, "upscaler", config.channels, 3, config.scale, rng);
  return m;
}

template <typename T>
Var predict_dynamic_weights(Tape<T>& tape, const ParamBinding<T>& p, const std::string& prefix, Var d, int channels,
                            int kernel) {
  const auto& dv = tape.value(d);
  const int in = tape.value(p[prefix + ".fc0.weight"]).dim(1);
  if (dv.rank() != 2 || dv.dim(1) != in) {
    throw std::invalid_argument("IDR has shape " + nn::shape_to_string(dv.shape()) + ", weight predictor expects N x " +
                                std::to_string(in));
  }
  const int n = dv.dim(0);
  Var h = nn::leaky_relu(tape, nn::dense(tape, p, prefix + ".fc0", d), T(nn::kLeakySlope));
  h = nn::dense(tape, p, prefix + ".fc1", h);
  return nn::reshape(tape, h, nn::Shape{n * channels, 1, kernel, kernel});
}

template <typename T>
RdaConvVars rda_conv(Tape<T>& tape, const ParamBinding<T>& p, const std::string& prefix, Var f, Var d, int kernel) {
  const int channels = tape.value(p[prefix + ".pw.weight"]).dim(0);
  if (tape.value(f).rank() != 4 || tape.value(f).dim(1) != channels) {
    throw std::invalid_argument("RDA conv " + prefix + " expects " + std::to_string(channels) + " channels, got " +
                                nn::shape_to_string(tape.value(f).shape()));
  }
  const Var w = predict_dynamic_weights(tape, p, prefix, d, channels, kernel);
  const Var f1 = nn::conv(tape, p, prefix + ".pw", nn::depthwise_conv2d(tape, f, w));
  const Var m = nn::sigmoid(tape, nn::conv(tape, p, prefix + ".mod", f));
  return {nn::add(tape, nn::mul(tape, m, f1), f), f1, m};
}

template <typename T>
Var rdan_forward(Tape<T>& tape, const ParamBinding<T>& p, const RdanConfig& config, Var lr, Var d) {
  const Var head = nn::conv(tape, p, "head", lr);
  Var h = head;
  for (int b = 0; b < config.blocks; ++b) {
    for (int j = 0; j < 2; ++j) {
      const std::string name = "blocks." + std::to_string(b) + ".rda" + std::to_string(j);
      h = nn::leaky_relu(tape, rda_conv(tape, p, name, h, d, config.kernel).out, T(nn::kLeakySlope));
    }
  }
  h = nn::add(tape, nn::conv(tape, p, "tail", h), head);
  return nn::upscale(tape, p, "upscaler", h, config.scale);
}

nn::Tensor<float> rdan_forward(const RdanModel& model, const nn::Tensor<float>& lr, const nn::Tensor<float>& d) {
  Tape<float> tape;
  ParamBinding<float> p(tape, model.params, nn::GradScope::kNone);
  return tape.value(rdan_forward(tape, p, model.config, tape.constant(lr), tape.constant(d)));
}

std::string TransferReport::to_string() const {
  std::ostringstream os;
  os << "copied " << copied << " entries";
  for (const auto& n : missing_in_target) os << "\n  missing in target: " << n;
  for (const auto& n : missing_in_source) os << "\n  missing in source: " << n;
  for (const auto& n : shape_mismatch) os << "\n  shape mismatch: " << n;
  return os.str();
}

TransferReport compare_structure(const nn::ParamSet& src, const nn::ParamSet& dst) {
  TransferReport r;
  for (const auto& e : src) {
    if (!dst.contains(e.name)) {
      r.missing_in_target.push_back(e.name);
    } else if (dst.tensor(e.name).shape() != e.value.shape()) {
      r.shape_mismatch.push_back(e.name + " " + nn::shape_to_string(e.value.shape()) + " vs " +
                                 nn::shape_to_string(dst.tensor(e.name).shape()));
    }
  }
  for (const auto& e : dst) {
    if (!src.contains(e.name)) r.missing_in_source.push_back(e.name);
  }
  return r;
}

TransferReport transfer_weights(const nn::ParamSet& src, nn::ParamSet& dst) {
  TransferReport r = compare_structure(src, dst);
  if (!r.ok()) throw std::invalid_argument("weight transfer failed: " + r.to_string());
  for (const auto& e : src) {
    dst.assign(e.name, e.value);
    ++r.copied;
  }
  return r;
}

#define MRDA_INSTANTIATE_RDAN(T)                                                                               \
  template Var predict_dynamic_weights<T>(Tape<T>&, const ParamBinding<T>&, const std::string&, Var, int, int); \
  template RdaConvVars rda_conv<T>(Tape<T>&, const ParamBinding<T>&, const std::string&, Var, Var, int);        \
  template Var rdan_forward<T>(Tape<T>&, const ParamBinding<T>&, const RdanConfig&, Var, Var);

MRDA_INSTANTIATE_RDAN(float)
MRDA_INSTANTIATE_RDAN(double)

}  // namespace mrda
