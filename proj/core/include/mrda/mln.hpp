#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mrda/degradation.hpp"
#include "mrda/hr_source.hpp"
#include "mrda/nn/layers.hpp"
#include "mrda/nn/optim.hpp"

namespace mrda {

struct MlnConfig {
  int channels = 64;  // C', width of the IDR feature map
  int scale = 4;
};

/// Meta-learning network: a head conv (3 -> C') that also serves as the
/// global-residual projection, seven C' -> C' body convs, and an upscaler.
/// Parameter names: head.*, body.<i>.*, upscaler.<i>.*.
struct MlnModel {
  MlnConfig config;
  nn::ParamSet params;
};

inline constexpr int kMlnBodyConvs = 7;

MlnModel mln_init(const MlnConfig& config, std::uint64_t seed);

/// Marks every upscaler entry as frozen (meta_mask = false).
void freeze_upscaler(nn::ParamSet& params);
bool is_upscaler_entry(const std::string& name);

struct MlnVars {
  nn::Var sr;
  nn::Var idr_map;  // post-residual body output, N x C' x h x w
};

template <typename T>
MlnVars mln_forward(nn::Tape<T>& tape, const nn::ParamBinding<T>& p, nn::Var lr, int scale);

struct MlnOutput {
  nn::Tensor<float> sr;
  nn::Tensor<float> idr_map;
};
MlnOutput mln_forward(const nn::ParamSet& params, const nn::Tensor<float>& lr, int scale);

/// Paired low/high resolution batches: lr N x 3 x h x w, hr N x 3 x sh x sw.
template <typename T>
struct BasicPairs {
  nn::Tensor<T> lr;
  nn::Tensor<T> hr;
  int size() const { return lr.rank() == 4 ? lr.dim(0) : 0; }
};
using Pairs = BasicPairs<float>;

/// Support and query pairs synthesized under one degradation.
struct TaskBatch {
  Pairs support;
  Pairs query;
  DegradationSpec spec;
};

/// L1 loss of the network on a batch, with gradient for the chosen entries.
template <typename T>
T mln_loss(const nn::BasicParamSet<T>& params, const BasicPairs<T>& data, int scale);
template <typename T>
T mln_loss_grad(const nn::BasicParamSet<T>& params, const BasicPairs<T>& data, int scale,
                nn::BasicParamSet<T>& grads, nn::GradScope scope = nn::GradScope::kMetaMasked);

/// n plain gradient steps on the support L1 loss, touching meta_mask entries
/// only. Returns a fresh copy; `params` is left untouched.
template <typename T>
nn::BasicParamSet<T> inner_adapt(const nn::BasicParamSet<T>& params, const BasicPairs<T>& support, int scale,
                                 int steps, T alpha);

/// Gradient of the query loss after inner adaptation w.r.t. the initial
/// parameters. First order treats the adapted parameters as independent of
/// the initial ones. Second order backpropagates through every inner step,
/// using finite-difference Hessian-vector products restricted to meta_mask
/// entries. Returns the query loss at the adapted parameters.
template <typename T>
T meta_gradient(const nn::BasicParamSet<T>& params, const BasicPairs<T>& support, const BasicPairs<T>& query,
                int scale, int steps, T alpha, bool second_order, nn::BasicParamSet<T>& grad);

/// Draws a degradation for one task or batch.
using DegradationSampler = std::function<DegradationSpec(Rng&)>;
DegradationSampler mode_sampler(DegradationMode mode, int scale, const SamplerConfig& cfg = {});
/// Uniform choice among isotropic kernels of the given widths, noise free.
DegradationSampler width_sampler(std::vector<double> widths, int scale, int kernel_size = kDefaultKernelSize);

/// `count` HR patches of lr_patch * scale pixels degraded under `spec`; each
/// image's noise stream is derived from spec.rng_seed and its index.
Pairs make_pairs(const HrSource& source, const DegradationSpec& spec, int count, int lr_patch, Rng& rng,
                 bool augment = true);
TaskBatch sample_task(const HrSource& source, const DegradationSampler& sampler, int support_size, int query_size,
                      int lr_patch, int scale, Rng& rng);

struct BicubicOptions {
  int steps = 200;
  int batch_size = 8;
  int lr_patch = 16;
  double lr = 2e-4;
  long halve_every = 0;  // 0 disables decay
  std::uint64_t seed = 0;
};

/// Supervised L1 training on bicubic-downsampled pairs, then freezes the
/// upscaler. Returns the per-step training loss.
std::vector<double> pretrain_bicubic(MlnModel& model, const HrSource& source, const BicubicOptions& opt);

struct MetaOptions {
  int epochs = 100;  // outer updates
  int tasks = 5;     // m
  int inner_steps = 5;  // n
  double alpha = 1e-2;
  double beta = 2e-4;
  long halve_every = 0;
  int support_size = 4;
  int query_size = 4;
  int lr_patch = 16;
  bool second_order = false;
  std::uint64_t seed = 0;
};

struct MetaLogRow {
  int epoch;
  std::vector<double> task_losses;  // query L1 per task after adaptation
  double query_psnr;                // mean query PSNR (RGB, no crop) after adaptation
};

/// Model-agnostic meta-learning on tasks from `sampler`. Requires a frozen
/// upscaler; frozen entries are never modified.
std::vector<MetaLogRow> meta_pretrain(MlnModel& model, const HrSource& source, const DegradationSampler& sampler,
                                      const MetaOptions& opt);

}  // namespace mrda
