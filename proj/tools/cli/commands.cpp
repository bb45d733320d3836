#include "commands.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "mrda/eval.hpp"
#include "mrda/hash.hpp"
#include "mrda/image_io.hpp"
#include "run_manifest.hpp"

namespace mrda::cli {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path run_root() {
  const char* env = std::getenv(kRunRootEnv);
  return env && *env ? fs::path(env) : fs::path("runs");
}

fs::path default_run_dir() { return run_root() / "default"; }

fs::path resolve_run_dir(const CommonOptions& o) { return o.run_dir.empty() ? default_run_dir() : fs::path(o.run_dir); }

fs::path stage1_checkpoint(const fs::path& run) { return run / "stage1" / "mln.ckpt"; }
fs::path stage2_checkpoint(const fs::path& run) { return run / "stage2" / "teacher.ckpt"; }
fs::path stage3_checkpoint(const fs::path& run) { return run / "stage3" / "student.ckpt"; }

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UserError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

fs::path saved_config(const fs::path& run) { return run / "config.json"; }

void require_file(const fs::path& path, const std::string& what, const std::string& hint) {
  if (!fs::is_regular_file(path)) throw UserError(what + " not found at " + path.string() + "; " + hint);
}

std::string stage_hint(const fs::path& run, const std::string& stage) {
  return "run `mrda " + stage + " --run-dir " + run.string() + "` first";
}

template <typename F>
auto as_user_error(const std::string& context, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw UserError(context + ": " + e.what());
  }
}

HrSource load_source(const TrainConfig& c) {
  return as_user_error("HR source", [&] { return make_hr_source(c); });
}

std::vector<ImageTensor> eval_images(const TrainConfig& c, const std::string& hr_dir, int count, int size,
                                     std::uint64_t stream) {
  if (!hr_dir.empty()) {
    auto imgs = as_user_error("HR directory", [&] { return read_image_dir(hr_dir); });
    if (imgs.empty()) throw UserError("no images in " + hr_dir);
    return imgs;
  }
  if (count < 1 || size < 1) throw UserError("--count and --image-size must be positive");
  std::vector<ImageTensor> imgs;
  for (int i = 0; i < count; ++i) {
    imgs.push_back(synth_hr_image(size, size, Rng::derive(Rng::derive(c.seed, stream), static_cast<std::uint64_t>(i))));
  }
  return imgs;
}

std::vector<DegradationSpec> width_grid(const TrainConfig& c, const std::vector<double>& widths) {
  std::vector<DegradationSpec> grid;
  for (double w : widths) {
    if (!(w > 0)) throw UserError("widths must be positive");
    DegradationSpec s;
    s.kernel = KernelSpec::isotropic(w);
    s.kernel_size = c.kernel_size;
    s.scale = c.scale;
    grid.push_back(s);
  }
  return grid;
}

/// Lists every disagreement between the models stored in a checkpoint and
/// the ones the config would build.
std::vector<std::string> structure_mismatches(const TrainConfig& c, const DenModel& den, const RdanModel& rdan,
                                              bool teacher) {
  std::vector<std::string> out;
  auto check = [&](const std::string& field, int have, int want) {
    if (have != want) {
      out.push_back(field + ": checkpoint " + std::to_string(have) + ", config " + std::to_string(want));
    }
  };
  const DenConfig dc = den_config(c, teacher);
  const RdanConfig rc = rdan_config(c);
  check("den input channels", den.config.in_channels, dc.in_channels);
  check("den channels", den.config.channels, dc.channels);
  check("idr_dim (DEN)", den.config.dim, dc.dim);
  check("idr_dim (RDAN)", rdan.config.idr_dim, rc.idr_dim);
  check("rdan channels", rdan.config.channels, rc.channels);
  check("rdan blocks", rdan.config.blocks, rc.blocks);
  check("dyn_kernel", rdan.config.kernel, rc.kernel);
  check("scale", rdan.config.scale, rc.scale);
  return out;
}

void require_compatible(const TrainConfig& c, const DenModel& den, const RdanModel& rdan, bool teacher,
                        const fs::path& path) {
  const auto bad = structure_mismatches(c, den, rdan, teacher);
  if (bad.empty()) return;
  std::ostringstream os;
  os << "checkpoint " << path.string() << " does not match the config:";
  for (const auto& b : bad) os << "\n  " << b;
  throw UserError(os.str());
}

struct Stamp {
  RunRecord record;
  Stamp(const std::string& command, const TrainConfig& c) {
    record.command = command;
    record.config_hash = config_hash(c);
    record.seed = c.seed;
    record.started = utc_timestamp();
  }
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json stage_meta(const TrainConfig& c, int stage, const std::vector<std::string>& parents) {
  return {{"stage", stage}, {"config", to_json(c)}, {"config_hash", config_hash(c)}, {"parents", parents}};
}

MlnModel load_stage1(const fs::path& run) {
  const fs::path p = stage1_checkpoint(run);
  require_file(p, "stage1 checkpoint", stage_hint(run, "stage1"));
  return as_user_error("loading " + p.string(), [&] { return load_mln(p); });
}

TeacherModel load_stage2(const fs::path& run) {
  const fs::path p = stage2_checkpoint(run);
  require_file(p, "stage2 checkpoint", stage_hint(run, "stage2"));
  auto [den, rdan] = as_user_error("loading " + p.string(), [&] { return load_den_rdan(p); });
  return {std::move(den), std::move(rdan)};
}

}  // namespace

TrainConfig resolve_config(const CommonOptions& o) {
  const fs::path run = resolve_run_dir(o);
  TrainConfig c = o.toy ? toy_config() : TrainConfig{};
  try {
    if (fs::is_regular_file(saved_config(run))) c = config_from_json(read_json_file(saved_config(run)), c);
    if (o.config) c = config_from_json(read_json_file(*o.config), c);
  } catch (const UserError&) {
    throw;
  } catch (const std::exception& e) {
    throw UserError(std::string("config: ") + e.what());
  }
  if (o.seed) c.seed = *o.seed;
  if (o.mode) c.mode = *o.mode;
  if (o.scale) c.scale = *o.scale;
  as_user_error("invalid configuration", [&] { c.validate(); });
  if (o.workers < 1) throw UserError("--workers must be >= 1");
  return c;
}

void cmd_synth(const SynthOptions& o, std::ostream& log) {
  const TrainConfig c = resolve_config(o.common);
  const fs::path run = resolve_run_dir(o.common);
  const fs::path out = o.out_dir.empty() ? run / "synth" : fs::path(o.out_dir);
  if (o.count < 1) throw UserError("--count must be >= 1");
  Stamp stamp("synth", c);

  std::vector<ImageTensor> pool;
  if (!c.hr_dir.empty()) {
    const HrSource src = load_source(c);
    for (std::size_t i = 0; i < src.size(); ++i) pool.push_back(src.image(i));
  }
  const DegradationSampler sampler = make_sampler(c);
  fs::create_directories(out / "hr");
  fs::create_directories(out / "lr");

  std::vector<std::string> lines(static_cast<std::size_t>(o.count));
  auto make = [&](int i) {
    const auto seed = Rng::derive(c.seed, static_cast<std::uint64_t>(i));
    const ImageTensor hr = pool.empty() ? synth_hr_image(c.hr_size, c.hr_size, Rng::derive(seed, 0))
                                        : pool[static_cast<std::size_t>(i) % pool.size()];
    Rng rng(Rng::derive(seed, 1));
    const DegradationSpec spec = sampler(rng);
    const ImageTensor lr = degrade(hr, spec);
    char id[16];
    std::snprintf(id, sizeof id, "%04d", i);
    const std::string hr_rel = std::string("hr/") + id + ".png", lr_rel = std::string("lr/") + id + ".png";
    write_png(out / hr_rel, hr);
    write_png(out / lr_rel, lr);
    lines[static_cast<std::size_t>(i)] = json{{"id", id},
                                              {"hr", hr_rel},
                                              {"lr", lr_rel},
                                              {"hr_hash", hash_file(out / hr_rel)},
                                              {"lr_hash", hash_file(out / lr_rel)},
                                              {"spec", to_json(spec)}}
                                             .dump();
  };
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < o.count; i = next++) make(i);
  };
  const int n = std::min(o.common.workers, o.count);
  std::vector<std::thread> threads;
  for (int w = 1; w < n; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::string text;
  for (const auto& l : lines) text += l + "\n";
  write_text(out / "manifest.jsonl", text);

  RunManifest manifest = RunManifest::open(run);
  stamp.record.outputs.push_back(manifest.artifact(out / "manifest.jsonl"));
  stamp.record.finished = utc_timestamp();
  manifest.add(stamp.record);
  manifest.save();
  log << "synth: " << o.count << " pairs (" << c.mode << ", x" << c.scale << ") in " << out.string() << "\n";
}

void cmd_stage1(const StageOptions& o, std::ostream& log) {
  const TrainConfig c = resolve_config(o.common);
  const fs::path run = resolve_run_dir(o.common);
  Stamp stamp("stage1", c);
  const HrSource source = load_source(c);
  StageLog slog;
  const MlnModel mln = train_stage1(c, source, &slog);

  fs::create_directories(run / "stage1");
  write_text(saved_config(run), to_json(c).dump(2) + "\n");
  const fs::path ckpt = stage1_checkpoint(run);
  save_mln(ckpt, mln, stage_meta(c, 1, {}));
  slog.write_csv(run / "stage1" / "log.csv");

  RunManifest manifest = RunManifest::open(run);
  const Artifact a = manifest.artifact(ckpt);
  stamp.record.outputs = {a, manifest.artifact(run / "stage1" / "log.csv"), manifest.artifact(saved_config(run))};
  stamp.record.finished = utc_timestamp();
  manifest.add(stamp.record);
  manifest.set_lineage("stage1", a, {});
  manifest.save();
  log << "stage1: wrote " << ckpt.string() << " (" << a.hash << ")\n";
}

void cmd_stage2(const StageOptions& o, std::ostream& log) {
  const fs::path run = resolve_run_dir(o.common);
  const MlnModel mln = load_stage1(run);
  const TrainConfig c = resolve_config(o.common);
  Stamp stamp("stage2", c);
  const HrSource source = load_source(c);
  StageLog slog;
  const TeacherModel t =
      as_user_error("stage2", [&] { return train_stage2_teacher(c, mln, source, &slog); });

  RunManifest manifest = RunManifest::open(run);
  const Artifact parent = manifest.artifact(stage1_checkpoint(run));
  const fs::path ckpt = stage2_checkpoint(run);
  fs::create_directories(ckpt.parent_path());
  save_den_rdan(ckpt, t.den, t.rdan, stage_meta(c, 2, {parent.hash}));
  slog.write_csv(run / "stage2" / "log.csv");

  const Artifact a = manifest.artifact(ckpt);
  stamp.record.inputs = {parent};
  stamp.record.outputs = {a, manifest.artifact(run / "stage2" / "log.csv")};
  stamp.record.finished = utc_timestamp();
  manifest.add(stamp.record);
  manifest.set_lineage("stage2", a, {parent.hash});
  manifest.save();
  log << "stage2: wrote " << ckpt.string() << " (" << a.hash << ")\n";
}

void cmd_stage3(const StageOptions& o, std::ostream& log) {
  const fs::path run = resolve_run_dir(o.common);
  const MlnModel mln = load_stage1(run);
  const TeacherModel teacher = load_stage2(run);
  const TrainConfig c = resolve_config(o.common);
  require_compatible(c, teacher.den, teacher.rdan, true, stage2_checkpoint(run));
  Stamp stamp("stage3", c);
  const HrSource source = load_source(c);
  StageLog slog;
  const StudentModel s =
      as_user_error("stage3", [&] { return train_stage3_student(c, mln, teacher, source, &slog); });

  RunManifest manifest = RunManifest::open(run);
  const Artifact p1 = manifest.artifact(stage1_checkpoint(run));
  const Artifact p2 = manifest.artifact(stage2_checkpoint(run));
  const fs::path ckpt = stage3_checkpoint(run);
  fs::create_directories(ckpt.parent_path());
  save_den_rdan(ckpt, s.den, s.rdan, stage_meta(c, 3, {p1.hash, p2.hash}));
  slog.write_csv(run / "stage3" / "log.csv");

  const Artifact a = manifest.artifact(ckpt);
  stamp.record.inputs = {p1, p2};
  stamp.record.outputs = {a, manifest.artifact(run / "stage3" / "log.csv")};
  stamp.record.finished = utc_timestamp();
  manifest.add(stamp.record);
  manifest.set_lineage("stage3", a, {p1.hash, p2.hash});
  manifest.save();
  log << "stage3: wrote " << ckpt.string() << " (" << a.hash << ")\n";
}

void cmd_eval(const EvalOptions& o, std::ostream& log) {
  const fs::path run = resolve_run_dir(o.common);
  const TrainConfig c = resolve_config(o.common);
  const fs::path ckpt = o.checkpoint.empty() ? stage3_checkpoint(run) : fs::path(o.checkpoint);
  require_file(ckpt, "student checkpoint", o.checkpoint.empty() ? stage_hint(run, "stage3") : "check --checkpoint");
  auto [den, rdan] = as_user_error("loading " + ckpt.string(), [&] { return load_den_rdan(ckpt); });
  require_compatible(c, den, rdan, false, ckpt);
  const StudentModel student{std::move(den), std::move(rdan)};
  Stamp stamp("eval", c);

  std::vector<DegradationSpec> specs;
  if (!o.widths.empty()) {
    specs = width_grid(c, o.widths);
  } else if (o.suite == "gaussian8") {
    for (const KernelSpec& k : gaussian8_suite(c.scale)) {
      DegradationSpec s;
      s.kernel = k;
      s.kernel_size = c.kernel_size;
      s.scale = c.scale;
      specs.push_back(s);
    }
  } else {
    throw UserError("unknown --suite '" + o.suite + "' (expected gaussian8, or pass --widths)");
  }
  const auto images = eval_images(c, o.hr_dir, o.count, o.image_size, 97);
  const std::string dataset = o.hr_dir.empty() ? "synthetic" : fs::path(o.hr_dir).filename().string();

  RunManifest manifest = RunManifest::open(run);
  const Artifact in = manifest.artifact(ckpt);
  const MetricReport report = evaluate_student(student, images, specs, dataset, in.hash, o.common.workers);
  const fs::path out = o.out_dir.empty() ? run / "eval" : fs::path(o.out_dir);
  fs::create_directories(out);
  report.write_csv(out / "report.csv");
  report.write_json(out / "report.json");

  stamp.record.inputs = {in};
  stamp.record.outputs = {manifest.artifact(out / "report.csv"), manifest.artifact(out / "report.json")};
  stamp.record.finished = utc_timestamp();
  manifest.add(stamp.record);
  manifest.save();
  log << "eval: " << report.rows.size() << " degradations x " << images.size() << " images, PSNR "
      << report.mean_psnr() << " dB, SSIM " << report.mean_ssim() << " -> " << out.string() << "\n";
}

double cmd_export_idr(const ExportOptions& o, std::ostream& log) {
  const fs::path run = resolve_run_dir(o.common);
  const TrainConfig c = resolve_config(o.common);
  if (o.path != "student" && o.path != "teacher") {
    throw UserError("--path must be 'student' or 'teacher', got '" + o.path + "'");
  }
  const bool teacher = o.path == "teacher";
  Stamp stamp("export-idr", c);
  RunManifest manifest = RunManifest::open(run);

  DenModel den;
  if (o.untrained) {
    den = teacher ? init_teacher(c).den : den_init(den_config(c, false), Rng::derive(c.seed, 31));
  } else {
    const fs::path ckpt = teacher ? stage2_checkpoint(run) : stage3_checkpoint(run);
    require_file(ckpt, o.path + " checkpoint", stage_hint(run, teacher ? "stage2" : "stage3"));
    auto [d, r] = as_user_error("loading " + ckpt.string(), [&] { return load_den_rdan(ckpt); });
    require_compatible(c, d, r, teacher, ckpt);
    den = std::move(d);
    stamp.record.inputs.push_back(manifest.artifact(ckpt));
  }

  const auto images = eval_images(c, o.hr_dir, o.count, o.image_size, 98);
  const auto grid = width_grid(c, o.widths);
  if (grid.size() < 2) throw UserError("export needs at least two --widths");
  std::vector<IdrRow> rows;
  if (teacher) {
    const MlnModel mln = load_stage1(run);
    stamp.record.inputs.push_back(manifest.artifact(stage1_checkpoint(run)));
    rows = export_idr_teacher(c, mln, den, images, grid);
  } else {
    rows = export_idr_student(den, images, grid);
  }
  const fs::path out = o.out.empty()
                           ? run / "export" / ("idr_" + o.path + (o.untrained ? "_untrained" : "") + ".jsonl")
                           : fs::path(o.out);
  write_idr_jsonl(out, rows);
  const double score = separability_score(rows);

  stamp.record.outputs = {manifest.artifact(out)};
  stamp.record.finished = utc_timestamp();
  manifest.add(stamp.record);
  manifest.save();
  log << "export-idr: " << rows.size() << " rows -> " << out.string() << "\nseparability " << score << "\n";
  return score;
}

std::vector<std::pair<int, double>> cmd_adapt_curve(const CurveOptions& o, std::ostream& log) {
  const fs::path run = resolve_run_dir(o.common);
  const MlnModel mln = load_stage1(run);
  const TrainConfig c = resolve_config(o.common);
  if (o.tasks < 1 || o.max_steps < 0) throw UserError("--tasks must be >= 1 and --max-steps >= 0");
  Stamp stamp("adapt-curve", c);
  const HrSource source = load_source(c);
  const auto sampler = as_user_error("widths", [&] { return width_sampler(o.widths, c.scale, c.kernel_size); });
  Rng rng(Rng::derive(c.seed, 99));
  std::vector<TaskBatch> tasks;
  for (int i = 0; i < o.tasks; ++i) {
    tasks.push_back(sample_task(source, sampler, c.support_size, c.query_size, c.patch_size, c.scale, rng));
  }
  const auto curve = adaptation_curve(mln.params, c.scale, tasks, o.max_steps, c.alpha);

  const fs::path out = o.out.empty() ? run / "adapt" / "curve.csv" : fs::path(o.out);
  std::ostringstream csv;
  csv << "steps,psnr\n";
  csv.precision(10);
  for (const auto& [k, p] : curve) csv << k << "," << p << "\n";
  write_text(out, csv.str());

  RunManifest manifest = RunManifest::open(run);
  stamp.record.inputs = {manifest.artifact(stage1_checkpoint(run))};
  stamp.record.outputs = {manifest.artifact(out)};
  stamp.record.finished = utc_timestamp();
  manifest.add(stamp.record);
  manifest.save();
  for (const auto& [k, p] : curve) log << "k=" << k << " psnr " << p << "\n";
  return curve;
}

}  // namespace mrda::cli
