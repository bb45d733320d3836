#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrda/den.hpp"
#include "mrda/mln.hpp"
#include "mrda/rdan.hpp"

namespace mrda {

/// Every knob of the three training stages. Maps 1:1 onto a JSON object.
struct TrainConfig {
  std::string mode = "classic_iso";
  int scale = 4;
  int batch_size = 64;
  int patch_size = 64;  // LR patch side; HR patches are scale times larger
  int inner_steps = 5;  // n
  int tasks = 5;        // m
  double alpha = 1e-2;
  double beta = 2e-4;
  double gamma = 2e-4;
  double lambda_kl = 1.0;
  double lambda_abs = 0.01;
  /// Learning rates halve after this fraction of each stage's length.
  double halve_fraction = 0.4;
  bool second_order = false;
  std::uint64_t seed = 0;

  int kernel_size = kDefaultKernelSize;
  std::vector<double> noise_levels{0.0, 10.0, 20.0, 25.0};
  /// When set, classic isotropic training draws widths from this list only.
  std::vector<double> widths;

  int mln_channels = 64;
  int den_channels = 64;
  int idr_dim = 256;
  int rdan_channels = 64;
  int rdan_blocks = 4;
  int dyn_kernel = 3;

  int bicubic_steps = 1000;
  /// Adam learning rate of the bicubic pretraining that precedes meta-training.
  double bicubic_lr = 2e-4;
  int meta_epochs = 500;
  int support_size = 4;
  int query_size = 4;
  int stage2_steps = 500;
  int stage3_steps = 500;

  /// HR pool: a directory of images, or synthetic images when empty.
  std::string hr_dir;
  int hr_count = 32;
  int hr_size = 256;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
/// Unknown keys are rejected; missing keys keep their defaults.
TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base = {});
/// FNV-1a of the canonical JSON dump.
std::string config_hash(const TrainConfig& c);

/// Desk-scale preset used by --toy and the acceptance suite.
TrainConfig toy_config();

MlnConfig mln_config(const TrainConfig& c);
DenConfig den_config(const TrainConfig& c, bool teacher);
RdanConfig rdan_config(const TrainConfig& c);
DegradationSampler make_sampler(const TrainConfig& c);
HrSource make_hr_source(const TrainConfig& c);
long halve_every(const TrainConfig& c, long total);

/// Column-named numeric log written as CSV.
struct StageLog {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  void write_csv(const std::filesystem::path& path) const;
};

struct TeacherModel {
  DenModel den;
  RdanModel rdan;
};

struct StudentModel {
  DenModel den;
  RdanModel rdan;
};

/// Bicubic pretraining followed by meta-training.
MlnModel train_stage1(const TrainConfig& c, const HrSource& source, StageLog* log = nullptr);

/// Adapts a copy of the MLN on the batch and returns D'_T (N x C' x h x w).
nn::Tensor<float> teacher_feature(const TrainConfig& c, const MlnModel& mln, const Pairs& batch);
/// D_T = DEN_T(D'_T) for the batch.
nn::Tensor<float> teacher_idr(const TrainConfig& c, const MlnModel& mln, const DenModel& den_t, const Pairs& batch);

TeacherModel init_teacher(const TrainConfig& c);
/// Trains DEN_T and RDAN_T jointly from scratch; the MLN is only read.
TeacherModel train_stage2_teacher(const TrainConfig& c, const MlnModel& mln, const HrSource& source,
                                  StageLog* log = nullptr);

/// Fresh DEN_S and an RDAN_S copied from the teacher's RDAN.
StudentModel init_student(const TrainConfig& c, const TeacherModel& teacher);
StudentModel train_stage3_student(const TrainConfig& c, const MlnModel& mln, const TeacherModel& teacher,
                                  const HrSource& source, StageLog* log = nullptr,
                                  std::optional<StudentModel> init = std::nullopt);

/// Mean l_abs(D_T, D_S) over `batches` freshly sampled batches.
double mean_kd_gap(const TrainConfig& c, const MlnModel& mln, const TeacherModel& teacher, const DenModel& den_s,
                   const HrSource& source, int batches, std::uint64_t seed);

// Checkpoints. Teacher and student files hold den.* and rdan.* entries.
void save_mln(const std::filesystem::path& path, const MlnModel& m, nlohmann::json meta);
MlnModel load_mln(const std::filesystem::path& path, nlohmann::json* meta = nullptr);
void save_den_rdan(const std::filesystem::path& path, const DenModel& den, const RdanModel& rdan, nlohmann::json meta);
std::pair<DenModel, RdanModel> load_den_rdan(const std::filesystem::path& path, nlohmann::json* meta = nullptr);

}  // namespace mrda
