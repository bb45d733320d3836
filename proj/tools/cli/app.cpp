#include <iostream>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace mrda::cli {

namespace {

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON config file (fields override defaults)");
  cmd->add_flag("--toy", o.toy, "Start from the small desk-scale preset");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--mode", o.mode, "classic_iso | classic_aniso_noise | realworld");
  cmd->add_option("--scale", o.scale, "Upscaling factor (2 or 4)");
  cmd->add_option("--run-dir", o.run_dir, "Run directory (default: $MRDA_RUN_ROOT/default)");
  cmd->add_option("--workers", o.workers, "Worker threads for synthesis and evaluation");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Meta-learned degradation representations for blind super-resolution"};
  app.name(args.empty() ? "mrda" : args.front());
  app.require_subcommand(1);

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Write deterministic HR/LR pairs and manifest.jsonl");
  add_common(c_synth, synth.common);
  c_synth->add_option("--count", synth.count, "Number of pairs");
  c_synth->add_option("--out-dir", synth.out_dir, "Output directory (default: <run>/synth)");

  StageOptions s1, s2, s3;
  auto* c_s1 = app.add_subcommand("stage1", "Bicubic pretraining and meta-training of the MLN");
  add_common(c_s1, s1.common);
  auto* c_s2 = app.add_subcommand("stage2", "Train the teacher (DEN_T + RDAN_T) on adapted MLN features");
  add_common(c_s2, s2.common);
  auto* c_s3 = app.add_subcommand("stage3", "Distill the student (DEN_S + RDAN_S) from the teacher");
  add_common(c_s3, s3.common);

  EvalOptions ev;
  auto* c_eval = app.add_subcommand("eval", "PSNR/SSIM of a student checkpoint over a degradation suite");
  add_common(c_eval, ev.common);
  c_eval->add_option("--checkpoint", ev.checkpoint, "Student checkpoint (default: <run>/stage3/student.ckpt)");
  c_eval->add_option("--suite", ev.suite, "Degradation suite: gaussian8");
  c_eval->add_option("--widths", ev.widths, "Isotropic widths, replaces the suite")->delimiter(',');
  c_eval->add_option("--hr-dir", ev.hr_dir, "HR images (default: synthetic)");
  c_eval->add_option("--count", ev.count, "Synthetic image count");
  c_eval->add_option("--image-size", ev.image_size, "Synthetic image side");
  c_eval->add_option("--out-dir", ev.out_dir, "Report directory (default: <run>/eval)");

  ExportOptions ex;
  auto* c_export = app.add_subcommand("export-idr", "Export degradation representations as JSONL");
  add_common(c_export, ex.common);
  c_export->add_option("--path", ex.path, "student | teacher");
  c_export->add_flag("--untrained", ex.untrained, "Use a freshly initialized DEN as baseline");
  c_export->add_option("--widths", ex.widths, "Isotropic widths to export")->delimiter(',');
  c_export->add_option("--hr-dir", ex.hr_dir, "HR images (default: synthetic)");
  c_export->add_option("--count", ex.count, "Synthetic image count");
  c_export->add_option("--image-size", ex.image_size, "Synthetic image side");
  c_export->add_option("--out", ex.out, "Output file");

  CurveOptions cv;
  auto* c_curve = app.add_subcommand("adapt-curve", "Query PSNR of the MLN after k inner steps");
  add_common(c_curve, cv.common);
  c_curve->add_option("--widths", cv.widths, "Isotropic widths of the task family")->delimiter(',');
  c_curve->add_option("--tasks", cv.tasks, "Number of tasks");
  c_curve->add_option("--max-steps", cv.max_steps, "Largest k");
  c_curve->add_option("--out", cv.out, "CSV output");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUserError;
  }

  try {
    if (*c_synth) cmd_synth(synth, out);
    if (*c_s1) cmd_stage1(s1, out);
    if (*c_s2) cmd_stage2(s2, out);
    if (*c_s3) cmd_stage3(s3, out);
    if (*c_eval) cmd_eval(ev, out);
    if (*c_export) cmd_export_idr(ex, out);
    if (*c_curve) cmd_adapt_curve(cv, out);
  } catch (const UserError& e) {
    err << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kOk;
}

}  // namespace mrda::cli
