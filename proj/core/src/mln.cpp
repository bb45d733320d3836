#include "mrda/mln.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mrda/losses.hpp"
#include "mrda/resize.hpp"

namespace mrda {

using nn::BasicParamSet;
using nn::GradScope;
using nn::ParamBinding;
using nn::Tape;
using nn::Tensor;
using nn::Var;

MlnModel mln_init(const MlnConfig& config, std::uint64_t seed) {
  if (config.channels < 1) throw std::invalid_argument("MLN width must be positive");
  nn::upscaler_stages(config.scale);
  Rng rng(seed);
  MlnModel m{config, {}};
  nn::add_conv_params(m.params, "head", config.channels, 3, 3, rng);
  for (int i = 0; i < kMlnBodyConvs; ++i) {
    nn::add_conv_params(m.params, "body." + std::to_string(i), config.channels, config.channels, 3, rng);
  }
  // The body is a residual branch around the head; start it small.
  const std::string last = "body." + std::to_string(kMlnBodyConvs - 1) + ".weight";
  nn::Tensor<float> w = m.params.tensor(last);
  for (float& v : w.values()) v *= 0.1f;
  m.params.assign(last, w);
  nn::add_upscaler_params(m.params, "upscaler", config.channels, 3, config.scale, rng);
  return m;
}

bool is_upscaler_entry(const std::string& name) { return name.rfind("upscaler.", 0) == 0; }

void freeze_upscaler(nn::ParamSet& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name = params.entry(i).name;
    if (is_upscaler_entry(name)) params.set_meta_mask(name, false);
  }
}

template <typename T>
MlnVars mln_forward(Tape<T>& tape, const ParamBinding<T>& p, Var lr, int scale) {
  const Var head = nn::conv(tape, p, "head", lr);
  Var h = head;
  for (int i = 0; i < kMlnBodyConvs; ++i) {
    h = nn::conv(tape, p, "body." + std::to_string(i), h);
    if (i + 1 < kMlnBodyConvs) h = nn::leaky_relu(tape, h, T(nn::kLeakySlope));
  }
  const Var idr = nn::add(tape, h, head);
  return {nn::upscale(tape, p, "upscaler", idr, scale), idr};
}

MlnOutput mln_forward(const nn::ParamSet& params, const Tensor<float>& lr, int scale) {
  Tape<float> tape;
  ParamBinding<float> p(tape, params, GradScope::kNone);
  const MlnVars v = mln_forward(tape, p, tape.constant(lr), scale);
  return {tape.value(v.sr), tape.value(v.idr_map)};
}

namespace {

template <typename T>
void check_pairs(const BasicPairs<T>& data, const char* what) {
  if (data.size() == 0) throw std::invalid_argument(std::string(what) + " set is empty");
}

template <typename T>
T norm_masked(const BasicParamSet<T>& v) {
  double s = 0.0;
  for (const auto& e : v) {
    if (!e.meta_mask) continue;
    for (T x : e.value.values()) s += double(x) * double(x);
  }
  return static_cast<T>(std::sqrt(s));
}

// theta + h * v on masked entries.
template <typename T>
BasicParamSet<T> shifted(const BasicParamSet<T>& theta, const BasicParamSet<T>& v, T h) {
  BasicParamSet<T> out = theta;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out.entry(i).meta_mask) continue;
    auto dst = out.values(i);
    const auto& src = v.entry(i).value;
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += h * src[k];
  }
  return out;
}

// Hessian of the support loss at theta applied to v, by central differences
// of gradients along v.
template <typename T>
BasicParamSet<T> hessian_vector(const BasicParamSet<T>& theta, const BasicPairs<T>& support, int scale,
                                const BasicParamSet<T>& v) {
  BasicParamSet<T> hv = theta.zeros_like();
  const T n = norm_masked(v);
  if (n == T(0)) return hv;
  const T step = static_cast<T>(sizeof(T) == 8 ? 1e-5 : 1e-2) / n;
  BasicParamSet<T> gp = hv, gm = hv;
  mln_loss_grad(shifted(theta, v, step), support, scale, gp, GradScope::kMetaMasked);
  mln_loss_grad(shifted(theta, v, -step), support, scale, gm, GradScope::kMetaMasked);
  nn::axpy(hv, gp, T(1) / (2 * step));
  nn::axpy(hv, gm, T(-1) / (2 * step));
  return hv;
}

double batch_psnr(const Tensor<float>& sr, const Tensor<float>& hr) {
  double mse = 0.0;
  for (std::size_t i = 0; i < sr.numel(); ++i) {
    const double d = std::clamp(double(sr[i]), 0.0, 1.0) - double(hr[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(sr.numel());
  return mse == 0.0 ? 100.0 : 10.0 * std::log10(1.0 / mse);
}

}  // namespace

template <typename T>
T mln_loss(const BasicParamSet<T>& params, const BasicPairs<T>& data, int scale) {
  check_pairs(data, "evaluation");
  Tape<T> tape;
  ParamBinding<T> p(tape, params, GradScope::kNone);
  const MlnVars v = mln_forward(tape, p, tape.constant(data.lr), scale);
  return tape.value(l_rec(tape, v.sr, tape.constant(data.hr)))[0];
}

template <typename T>
T mln_loss_grad(const BasicParamSet<T>& params, const BasicPairs<T>& data, int scale, BasicParamSet<T>& grads,
                GradScope scope) {
  check_pairs(data, "training");
  Tape<T> tape;
  ParamBinding<T> p(tape, params, scope);
  const MlnVars v = mln_forward(tape, p, tape.constant(data.lr), scale);
  const Var loss = l_rec(tape, v.sr, tape.constant(data.hr));
  tape.backward(loss);
  grads = p.gradients(tape);
  return tape.value(loss)[0];
}

template <typename T>
BasicParamSet<T> inner_adapt(const BasicParamSet<T>& params, const BasicPairs<T>& support, int scale, int steps,
                             T alpha) {
  check_pairs(support, "support");
  if (steps < 0) throw std::invalid_argument("inner steps must be nonnegative");
  if (!(alpha > T(0))) throw std::invalid_argument("inner learning rate must be positive");
  BasicParamSet<T> theta = params;
  BasicParamSet<T> g;
  for (int k = 0; k < steps; ++k) {
    mln_loss_grad(theta, support, scale, g, GradScope::kMetaMasked);
    nn::masked_sgd_step(theta, g, alpha);
  }
  return theta;
}

template <typename T>
T meta_gradient(const BasicParamSet<T>& params, const BasicPairs<T>& support, const BasicPairs<T>& query, int scale,
                int steps, T alpha, bool second_order, BasicParamSet<T>& grad) {
  check_pairs(support, "support");
  check_pairs(query, "query");
  if (!second_order) {
    const BasicParamSet<T> adapted = inner_adapt(params, support, scale, steps, alpha);
    return mln_loss_grad(adapted, query, scale, grad, GradScope::kMetaMasked);
  }
  std::vector<BasicParamSet<T>> path{params};
  BasicParamSet<T> g;
  for (int k = 0; k < steps; ++k) {
    BasicParamSet<T> next = path.back();
    mln_loss_grad(next, support, scale, g, GradScope::kMetaMasked);
    nn::masked_sgd_step(next, g, alpha);
    path.push_back(std::move(next));
  }
  const T loss = mln_loss_grad(path.back(), query, scale, grad, GradScope::kMetaMasked);
  // theta_{k+1} = theta_k - alpha * grad L_s(theta_k), so
  // dL/dtheta_k = (I - alpha * H(theta_k)) dL/dtheta_{k+1}.
  for (int k = steps - 1; k >= 0; --k) {
    const BasicParamSet<T> hv = hessian_vector(path[static_cast<std::size_t>(k)], support, scale, grad);
    nn::axpy(grad, hv, -alpha);
  }
  return loss;
}

DegradationSampler mode_sampler(DegradationMode mode, int scale, const SamplerConfig& cfg) {
  return [mode, scale, cfg](Rng& rng) { return sample_degradation(mode, scale, rng, cfg); };
}

DegradationSampler width_sampler(std::vector<double> widths, int scale, int kernel_size) {
  if (widths.empty()) throw std::invalid_argument("width family is empty");
  if (scale != 2 && scale != 4) throw std::invalid_argument("scale must be 2 or 4");
  return [widths = std::move(widths), scale, kernel_size](Rng& rng) {
    DegradationSpec s;
    s.scale = scale;
    s.kernel_size = kernel_size;
    s.kernel = KernelSpec::isotropic(widths[static_cast<std::size_t>(rng.uniform_int(0, int(widths.size()) - 1))]);
    s.rng_seed = rng.next();
    return s;
  };
}

namespace {
Pairs make_pairs_from(const HrSource& source, const DegradationSpec& spec, int count, int lr_patch, Rng& rng,
                      bool augment, int first_index) {
  if (count < 1) throw std::invalid_argument("pair count must be positive");
  std::vector<ImageTensor> hr, lr;
  for (int i = 0; i < count; ++i) {
    hr.push_back(source.sample_patch(lr_patch * spec.scale, rng, augment));
    DegradationSpec s = spec;
    s.rng_seed = Rng::derive(spec.rng_seed, static_cast<std::uint64_t>(first_index + i));
    lr.push_back(degrade(hr.back(), s));
  }
  return {to_tensor<float>(lr), to_tensor<float>(hr)};
}
}  // namespace

Pairs make_pairs(const HrSource& source, const DegradationSpec& spec, int count, int lr_patch, Rng& rng,
                 bool augment) {
  return make_pairs_from(source, spec, count, lr_patch, rng, augment, 0);
}

TaskBatch sample_task(const HrSource& source, const DegradationSampler& sampler, int support_size, int query_size,
                      int lr_patch, int scale, Rng& rng) {
  DegradationSpec spec = sampler(rng);
  if (spec.scale != scale) throw std::invalid_argument("sampler scale differs from task scale");
  TaskBatch t;
  t.support = make_pairs_from(source, spec, support_size, lr_patch, rng, true, 0);
  t.query = make_pairs_from(source, spec, query_size, lr_patch, rng, true, support_size);
  t.spec = std::move(spec);
  return t;
}

std::vector<double> pretrain_bicubic(MlnModel& model, const HrSource& source, const BicubicOptions& opt) {
  if (opt.steps < 0 || opt.batch_size < 1 || opt.lr_patch < 1) throw std::invalid_argument("invalid bicubic options");
  const int scale = model.config.scale;
  nn::Adam adam(model.params, {opt.lr});
  Rng rng(opt.seed);
  std::vector<double> losses;
  for (int step = 0; step < opt.steps; ++step) {
    if (opt.halve_every > 0) adam.set_lr(nn::lr_schedule(step, opt.lr, opt.halve_every));
    std::vector<ImageTensor> hr, lr;
    for (int b = 0; b < opt.batch_size; ++b) {
      hr.push_back(source.sample_patch(opt.lr_patch * scale, rng));
      ImageTensor small = resize_bicubic(hr.back(), opt.lr_patch, opt.lr_patch);
      small.clip();
      lr.push_back(std::move(small));
    }
    const Pairs data{to_tensor<float>(lr), to_tensor<float>(hr)};
    nn::ParamSet g;
    losses.push_back(mln_loss_grad(model.params, data, scale, g, GradScope::kAll));
    adam.step(model.params, g, nn::UpdateScope::kAll);
  }
  freeze_upscaler(model.params);
  return losses;
}

std::vector<MetaLogRow> meta_pretrain(MlnModel& model, const HrSource& source, const DegradationSampler& sampler,
                                      const MetaOptions& opt) {
  if (opt.tasks < 1) throw std::invalid_argument("meta-training needs at least one task per update");
  if (opt.epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
  for (const auto& e : model.params) {
    if (is_upscaler_entry(e.name) && e.meta_mask) {
      throw std::invalid_argument("meta-training requires a frozen upscaler; run bicubic pretraining first");
    }
  }
  const int scale = model.config.scale;
  nn::Adam adam(model.params, {opt.beta});
  std::vector<MetaLogRow> log;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    if (opt.halve_every > 0) adam.set_lr(nn::lr_schedule(epoch, opt.beta, opt.halve_every));
    Rng rng(Rng::derive(opt.seed, static_cast<std::uint64_t>(epoch)));
    nn::ParamSet acc = model.params.zeros_like();
    MetaLogRow row{epoch, {}, 0.0};
    for (int t = 0; t < opt.tasks; ++t) {
      const TaskBatch task = sample_task(source, sampler, opt.support_size, opt.query_size, opt.lr_patch, scale, rng);
      nn::ParamSet g;
      double loss = 0.0;
      if (opt.second_order) {
        const BasicPairs<double> s{task.support.lr.cast<double>(), task.support.hr.cast<double>()};
        const BasicPairs<double> q{task.query.lr.cast<double>(), task.query.hr.cast<double>()};
        BasicParamSet<double> gd;
        loss = meta_gradient(model.params.cast<double>(), s, q, scale, opt.inner_steps, opt.alpha, true, gd);
        g = gd.cast<float>();
      } else {
        loss = meta_gradient(model.params, task.support, task.query, scale, opt.inner_steps, float(opt.alpha), false, g);
      }
      nn::axpy(acc, g, 1.0f / float(opt.tasks));
      row.task_losses.push_back(loss);
      const nn::ParamSet adapted = inner_adapt(model.params, task.support, scale, opt.inner_steps, float(opt.alpha));
      row.query_psnr += batch_psnr(mln_forward(adapted, task.query.lr, scale).sr, task.query.hr) / opt.tasks;
    }
    adam.step(model.params, acc, nn::UpdateScope::kMetaMasked);
    log.push_back(std::move(row));
  }
  return log;
}

#define MRDA_INSTANTIATE_MLN(T)                                                                                  \
  template MlnVars mln_forward<T>(Tape<T>&, const ParamBinding<T>&, Var, int);                                 \
  template T mln_loss<T>(const BasicParamSet<T>&, const BasicPairs<T>&, int);                                  \
  template T mln_loss_grad<T>(const BasicParamSet<T>&, const BasicPairs<T>&, int, BasicParamSet<T>&, GradScope); \
  template BasicParamSet<T> inner_adapt<T>(const BasicParamSet<T>&, const BasicPairs<T>&, int, int, T);        \
  template T meta_gradient<T>(const BasicParamSet<T>&, const BasicPairs<T>&, const BasicPairs<T>&, int, int, T,  \
                              bool, BasicParamSet<T>&);

MRDA_INSTANTIATE_MLN(float)
MRDA_INSTANTIATE_MLN(double)

}  // namespace mrda
