#include "mrda/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "mrda/hash.hpp"
#include "mrda/losses.hpp"
#include "mrda/nn/checkpoint.hpp"

namespace mrda {

using nn::GradScope;
using nn::ParamBinding;
using nn::Tape;
using nn::Tensor;
using nn::Var;

#define MRDA_CONFIG_FIELDS(X) \
  X(mode)                     \
  X(scale)                    \
  X(batch_size)               \
  X(patch_size)               \
  X(inner_steps)              \
  X(tasks)                    \
  X(alpha)                    \
  X(beta)                     \
  X(gamma)                    \
  X(lambda_kl)                \
  X(lambda_abs)               \
  X(halve_fraction)           \
  X(second_order)             \
  X(seed)                     \
  X(kernel_size)              \
  X(noise_levels)             \
  X(widths)                   \
  X(mln_channels)             \
  X(den_channels)             \
  X(idr_dim)                  \
  X(rdan_channels)            \
  X(rdan_blocks)              \
  X(dyn_kernel)               \
  X(bicubic_steps)            \
  X(bicubic_lr)               \
  X(meta_epochs)              \
  X(support_size)             \
  X(query_size)               \
  X(stage2_steps)             \
  X(stage3_steps)             \
  X(hr_dir)                   \
  X(hr_count)                 \
  X(hr_size)

nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json j;
#define X(f) j[#f] = c.f;
  MRDA_CONFIG_FIELDS(X)
#undef X
  return j;
}

TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::set<std::string> known = {
#define X(f) #f,
      MRDA_CONFIG_FIELDS(X)
#undef X
  };
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw std::invalid_argument("unknown config key '" + k + "'");
  }
  try {
#define X(f) \
  if (j.contains(#f)) j.at(#f).get_to(base.f);
    MRDA_CONFIG_FIELDS(X)
#undef X
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  return base;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  parse_mode(mode);
  if (scale != 2 && scale != 4) fail("scale must be 2 or 4");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (patch_size < 1) fail("patch_size must be >= 1");
  if (inner_steps < 1) fail("inner_steps must be >= 1");
  if (tasks < 1) fail("tasks must be >= 1");
  if (!(alpha > 0) || !(beta > 0) || !(gamma > 0) || !(bicubic_lr > 0)) fail("learning rates must be positive");
  if (lambda_kl < 0 || lambda_abs < 0) fail("loss weights must be nonnegative");
  if (!(halve_fraction > 0)) fail("halve_fraction must be positive");
  if (kernel_size < 1 || kernel_size % 2 == 0) fail("kernel_size must be odd");
  if (noise_levels.empty()) fail("noise_levels must not be empty");
  for (double w : widths)
    if (!(w > 0)) fail("widths must be positive");
  if (mln_channels < 1 || den_channels < 1 || idr_dim < 1 || rdan_channels < 1 || rdan_blocks < 1) {
    fail("network sizes must be positive");
  }
  if (dyn_kernel < 1 || dyn_kernel % 2 == 0) fail("dyn_kernel must be odd");
  if (bicubic_steps < 0 || meta_epochs < 0 || stage2_steps < 0 || stage3_steps < 0) fail("step counts must be >= 0");
  if (support_size < 1 || query_size < 1) fail("support_size and query_size must be >= 1");
  if (hr_dir.empty() && (hr_count < 1 || hr_size < patch_size * scale)) {
    fail("synthetic HR images must be at least patch_size * scale pixels");
  }
}

std::string config_hash(const TrainConfig& c) { return hex64(fnv1a64(to_json(c).dump())); }

TrainConfig toy_config() {
  TrainConfig c;
  c.scale = 4;
  c.batch_size = 8;
  c.patch_size = 8;
  c.mln_channels = 16;
  c.den_channels = 32;
  c.idr_dim = 64;
  c.rdan_channels = 16;
  c.rdan_blocks = 2;
  c.bicubic_steps = 1000;
  c.bicubic_lr = 3e-3;
  c.meta_epochs = 150;
  c.support_size = 2;
  c.query_size = 2;
  c.stage2_steps = 300;
  c.stage3_steps = 300;
  c.hr_count = 16;
  c.hr_size = 96;
  c.gamma = 1e-3;
  c.beta = 1e-3;
  return c;
}

MlnConfig mln_config(const TrainConfig& c) { return {c.mln_channels, c.scale}; }
DenConfig den_config(const TrainConfig& c, bool teacher) {
  return {teacher ? c.mln_channels : 3, c.den_channels, c.idr_dim};
}
RdanConfig rdan_config(const TrainConfig& c) {
  return {c.rdan_channels, c.rdan_blocks, c.dyn_kernel, c.idr_dim, 0, c.scale};
}

DegradationSampler make_sampler(const TrainConfig& c) {
  const DegradationMode mode = parse_mode(c.mode);
  if (!c.widths.empty() && mode == DegradationMode::kClassicIso) return width_sampler(c.widths, c.scale, c.kernel_size);
  SamplerConfig sc;
  sc.kernel_size = c.kernel_size;
  sc.aniso_noise_levels = c.noise_levels;
  return mode_sampler(mode, c.scale, sc);
}

HrSource make_hr_source(const TrainConfig& c) {
  if (!c.hr_dir.empty()) return HrSource::from_directory(c.hr_dir);
  return HrSource::synthetic(c.hr_count, c.hr_size, Rng::derive(c.seed, 0x4852));
}

long halve_every(const TrainConfig& c, long total) {
  return std::max(1L, std::lround(c.halve_fraction * static_cast<double>(total)));
}

void StageLog::write_csv(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  char buf[64];
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.9g", r[i]);
      out << (i ? "," : "") << buf;
    }
    out << "\n";
  }
}

MlnModel train_stage1(const TrainConfig& c, const HrSource& source, StageLog* log) {
  c.validate();
  MlnModel mln = mln_init(mln_config(c), Rng::derive(c.seed, 1));
  BicubicOptions bo;
  bo.steps = c.bicubic_steps;
  bo.batch_size = c.batch_size;
  bo.lr_patch = c.patch_size;
  bo.lr = c.bicubic_lr;
  bo.halve_every = halve_every(c, c.bicubic_steps);
  bo.seed = Rng::derive(c.seed, 2);
  const std::vector<double> pre = pretrain_bicubic(mln, source, bo);

  MetaOptions mo;
  mo.epochs = c.meta_epochs;
  mo.tasks = c.tasks;
  mo.inner_steps = c.inner_steps;
  mo.alpha = c.alpha;
  mo.beta = c.beta;
  mo.halve_every = halve_every(c, c.meta_epochs);
  mo.support_size = c.support_size;
  mo.query_size = c.query_size;
  mo.lr_patch = c.patch_size;
  mo.second_order = c.second_order;
  mo.seed = Rng::derive(c.seed, 3);
  const std::vector<MetaLogRow> meta = meta_pretrain(mln, source, make_sampler(c), mo);

  if (log) {
    log->columns = {"phase", "step", "loss", "query_psnr"};
    for (std::size_t i = 0; i < pre.size(); ++i) log->rows.push_back({0.0, double(i), pre[i], NAN});
    for (const auto& r : meta) {
      double mean = 0.0;
      for (double l : r.task_losses) mean += l / double(r.task_losses.size());
      log->rows.push_back({1.0, double(r.epoch), mean, r.query_psnr});
    }
  }
  return mln;
}

Tensor<float> teacher_feature(const TrainConfig& c, const MlnModel& mln, const Pairs& batch) {
  const nn::ParamSet adapted = inner_adapt(mln.params, batch, mln.config.scale, c.inner_steps, float(c.alpha));
  return mln_forward(adapted, batch.lr, mln.config.scale).idr_map;
}

Tensor<float> teacher_idr(const TrainConfig& c, const MlnModel& mln, const DenModel& den_t, const Pairs& batch) {
  return den_forward(den_t.params, teacher_feature(c, mln, batch));
}

TeacherModel init_teacher(const TrainConfig& c) {
  return {den_init(den_config(c, true), Rng::derive(c.seed, 11)), rdan_init(rdan_config(c), Rng::derive(c.seed, 12))};
}

namespace {

double psnr_rgb(const Tensor<float>& sr, const Tensor<float>& hr) {
  double mse = 0.0;
  for (std::size_t i = 0; i < sr.numel(); ++i) {
    const double d = std::clamp(double(sr[i]), 0.0, 1.0) - double(hr[i]);
    mse += d * d;
  }
  mse /= double(sr.numel());
  return mse == 0.0 ? 100.0 : 10.0 * std::log10(1.0 / mse);
}

Pairs sample_batch(const TrainConfig& c, const HrSource& source, const DegradationSampler& sampler, Rng& rng) {
  const DegradationSpec spec = sampler(rng);
  return make_pairs(source, spec, c.batch_size, c.patch_size, rng);
}

}  // namespace

TeacherModel train_stage2_teacher(const TrainConfig& c, const MlnModel& mln, const HrSource& source, StageLog* log) {
  c.validate();
  if (mln.config.channels != c.mln_channels || mln.config.scale != c.scale) {
    throw std::invalid_argument("MLN checkpoint does not match config (channels/scale)");
  }
  TeacherModel t = init_teacher(c);
  nn::Adam adam_den(t.den.params, {c.gamma});
  nn::Adam adam_rdan(t.rdan.params, {c.gamma});
  const long halve = halve_every(c, c.stage2_steps);
  const DegradationSampler sampler = make_sampler(c);
  if (log) log->columns = {"step", "l_rec", "psnr"};
  for (int step = 0; step < c.stage2_steps; ++step) {
    const double lr = nn::lr_schedule(step, c.gamma, halve);
    adam_den.set_lr(lr);
    adam_rdan.set_lr(lr);
    Rng rng(Rng::derive(Rng::derive(c.seed, 21), static_cast<std::uint64_t>(step)));
    const Pairs batch = sample_batch(c, source, sampler, rng);
    const Tensor<float> feature = teacher_feature(c, mln, batch);

    Tape<float> tape;
    ParamBinding<float> pd(tape, t.den.params, GradScope::kAll);
    ParamBinding<float> pr(tape, t.rdan.params, GradScope::kAll);
    const Var d = den_forward(tape, pd, tape.constant(feature));
    const Var sr = rdan_forward(tape, pr, t.rdan.config, tape.constant(batch.lr), d);
    const Var loss = l_rec(tape, sr, tape.constant(batch.hr));
    tape.backward(loss);
    adam_den.step(t.den.params, pd.gradients(tape));
    adam_rdan.step(t.rdan.params, pr.gradients(tape));
    if (log) log->rows.push_back({double(step), double(tape.value(loss)[0]), psnr_rgb(tape.value(sr), batch.hr)});
  }
  return t;
}

StudentModel init_student(const TrainConfig& c, const TeacherModel& teacher) {
  StudentModel s{den_init(den_config(c, false), Rng::derive(c.seed, 31)), rdan_init(rdan_config(c), 0)};
  transfer_weights(teacher.rdan.params, s.rdan.params);
  return s;
}

StudentModel train_stage3_student(const TrainConfig& c, const MlnModel& mln, const TeacherModel& teacher,
                                  const HrSource& source, StageLog* log, std::optional<StudentModel> init) {
  c.validate();
  StudentModel s = init ? std::move(*init) : init_student(c, teacher);
  const TransferReport report = compare_structure(teacher.rdan.params, s.rdan.params);
  if (!report.ok()) throw std::invalid_argument("student RDAN incompatible with teacher: " + report.to_string());
  nn::Adam adam_den(s.den.params, {c.gamma});
  nn::Adam adam_rdan(s.rdan.params, {c.gamma});
  const long halve = halve_every(c, c.stage3_steps);
  const DegradationSampler sampler = make_sampler(c);
  if (log) log->columns = {"step", "loss", "l_rec", "l_kl", "l_abs"};
  for (int step = 0; step < c.stage3_steps; ++step) {
    const double lr = nn::lr_schedule(step, c.gamma, halve);
    adam_den.set_lr(lr);
    adam_rdan.set_lr(lr);
    Rng rng(Rng::derive(Rng::derive(c.seed, 41), static_cast<std::uint64_t>(step)));
    const Pairs batch = sample_batch(c, source, sampler, rng);
    const Tensor<float> dt = teacher_idr(c, mln, teacher.den, batch);

    Tape<float> tape;
    ParamBinding<float> pd(tape, s.den.params, GradScope::kAll);
    ParamBinding<float> pr(tape, s.rdan.params, GradScope::kAll);
    const Var lr_v = tape.constant(batch.lr);
    const Var ds = den_forward(tape, pd, lr_v);
    const Var sr = rdan_forward(tape, pr, s.rdan.config, lr_v, ds);
    const Var dt_v = tape.constant(dt);
    const Var rec = l_rec(tape, sr, tape.constant(batch.hr));
    const Var kl = l_kl(tape, dt_v, ds);
    const Var ab = l_abs(tape, dt_v, ds);
    Var loss = nn::add(tape, rec, nn::scale(tape, kl, float(c.lambda_kl)));
    loss = nn::add(tape, loss, nn::scale(tape, ab, float(c.lambda_abs)));
    tape.backward(loss);
    adam_den.step(s.den.params, pd.gradients(tape));
    adam_rdan.step(s.rdan.params, pr.gradients(tape));
    if (log) {
      log->rows.push_back({double(step), double(tape.value(loss)[0]), double(tape.value(rec)[0]),
                           double(tape.value(kl)[0]), double(tape.value(ab)[0])});
    }
  }
  return s;
}

double mean_kd_gap(const TrainConfig& c, const MlnModel& mln, const TeacherModel& teacher, const DenModel& den_s,
                   const HrSource& source, int batches, std::uint64_t seed) {
  if (batches < 1) throw std::invalid_argument("need at least one batch");
  const DegradationSampler sampler = make_sampler(c);
  double total = 0.0;
  for (int b = 0; b < batches; ++b) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(b)));
    const Pairs batch = sample_batch(c, source, sampler, rng);
    const Tensor<float> dt = teacher_idr(c, mln, teacher.den, batch);
    const Tensor<float> ds = den_forward(den_s.params, batch.lr);
    double s = 0.0;
    for (std::size_t i = 0; i < dt.numel(); ++i) s += std::abs(double(dt[i]) - double(ds[i]));
    total += s / double(dt.numel());
  }
  return total / batches;
}

namespace {

nlohmann::json mln_json(const MlnConfig& m) { return {{"channels", m.channels}, {"scale", m.scale}}; }
nlohmann::json den_json(const DenConfig& d) {
  return {{"in_channels", d.in_channels}, {"channels", d.channels}, {"dim", d.dim}};
}
nlohmann::json rdan_json(const RdanConfig& r) {
  return {{"channels", r.channels}, {"blocks", r.blocks}, {"kernel", r.kernel},
          {"idr_dim", r.idr_dim},   {"hidden", r.hidden}, {"scale", r.scale}};
}

nlohmann::json models_of(const nlohmann::json& meta, const std::filesystem::path& path) {
  if (!meta.contains("models")) throw std::runtime_error(path.string() + " carries no model description");
  return meta.at("models");
}

}  // namespace

void save_mln(const std::filesystem::path& path, const MlnModel& m, nlohmann::json meta) {
  meta["models"] = {{"mln", mln_json(m.config)}};
  nn::save_checkpoint(path, m.params, meta);
}

MlnModel load_mln(const std::filesystem::path& path, nlohmann::json* meta) {
  nn::Checkpoint ck = nn::load_checkpoint(path);
  const auto j = models_of(ck.meta, path);
  if (!j.contains("mln")) throw std::runtime_error(path.string() + " is not an MLN checkpoint");
  MlnModel m;
  m.config = {j["mln"].at("channels").get<int>(), j["mln"].at("scale").get<int>()};
  const MlnModel like = mln_init(m.config, 0);
  const TransferReport r = compare_structure(like.params, ck.params);
  if (!r.ok()) throw std::runtime_error("MLN checkpoint structure mismatch: " + r.to_string());
  m.params = std::move(ck.params);
  if (meta) *meta = ck.meta;
  return m;
}

void save_den_rdan(const std::filesystem::path& path, const DenModel& den, const RdanModel& rdan, nlohmann::json meta) {
  meta["models"] = {{"den", den_json(den.config)}, {"rdan", rdan_json(rdan.config)}};
  nn::ParamSet all;
  nn::merge_prefixed(all, den.params, "den.");
  nn::merge_prefixed(all, rdan.params, "rdan.");
  nn::save_checkpoint(path, all, meta);
}

std::pair<DenModel, RdanModel> load_den_rdan(const std::filesystem::path& path, nlohmann::json* meta) {
  nn::Checkpoint ck = nn::load_checkpoint(path);
  const auto j = models_of(ck.meta, path);
  if (!j.contains("den") || !j.contains("rdan")) throw std::runtime_error(path.string() + " holds no DEN/RDAN pair");
  DenModel den;
  den.config = {j["den"].at("in_channels").get<int>(), j["den"].at("channels").get<int>(), j["den"].at("dim").get<int>()};
  RdanModel rdan;
  const auto& r = j["rdan"];
  rdan.config = {r.at("channels").get<int>(), r.at("blocks").get<int>(),  r.at("kernel").get<int>(),
                 r.at("idr_dim").get<int>(),  r.at("hidden").get<int>(), r.at("scale").get<int>()};
  den.params = nn::extract_prefixed(ck.params, "den.");
  rdan.params = nn::extract_prefixed(ck.params, "rdan.");
  const TransferReport rd = compare_structure(den_init(den.config, 0).params, den.params);
  const TransferReport rr = compare_structure(rdan_init(rdan.config, 0).params, rdan.params);
  if (!rd.ok() || !rr.ok()) {
    throw std::runtime_error("checkpoint structure mismatch in " + path.string() + ": " + rd.to_string() + "; " +
                             rr.to_string());
  }
  if (meta) *meta = ck.meta;
  return {std::move(den), std::move(rdan)};
}

}  // namespace mrda
