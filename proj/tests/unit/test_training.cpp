#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mrda/hash.hpp"
#include "mrda/training.hpp"

using namespace mrda;
using namespace mrda::nn;

namespace {

// Small enough to run all three stages in a few seconds.
TrainConfig tiny_config() {
  TrainConfig c = toy_config();
  c.batch_size = 2;
  c.patch_size = 6;
  c.mln_channels = 4;
  c.den_channels = 4;
  c.idr_dim = 6;
  c.rdan_channels = 4;
  c.rdan_blocks = 1;
  c.bicubic_steps = 6;
  c.meta_epochs = 2;
  c.tasks = 2;
  c.inner_steps = 2;
  c.support_size = 1;
  c.query_size = 1;
  c.stage2_steps = 4;
  c.stage3_steps = 4;
  c.hr_count = 2;
  c.hr_size = 32;
  c.widths = {0.5, 2.0};
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mrda_training_" + name);
}

}  // namespace

TEST(TrainConfig, JsonRoundTripAndHash) {
  TrainConfig c = toy_config();
  c.widths = {0.5, 2.0};
  c.seed = 17;
  const TrainConfig back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  TrainConfig d = c;
  d.seed = 18;
  EXPECT_NE(config_hash(d), config_hash(c));
}

TEST(TrainConfig, PartialJsonKeepsBaseAndRejectsUnknownKeys) {
  const TrainConfig c = config_from_json({{"scale", 2}}, toy_config());
  EXPECT_EQ(c.scale, 2);
  EXPECT_EQ(c.mln_channels, toy_config().mln_channels);
  EXPECT_THROW(config_from_json({{"scael", 2}}), std::invalid_argument);
}

TEST(TrainConfig, ValidateNamesTheField) {
  TrainConfig c = toy_config();
  c.scale = 3;
  try {
    c.validate();
    FAIL() << "scale 3 accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("scale"), std::string::npos);
  }
  c = toy_config();
  c.dyn_kernel = 4;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = toy_config();
  c.mode = "nope";
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_NO_THROW(toy_config().validate());
  EXPECT_NO_THROW(TrainConfig{}.validate());
}

TEST(TrainConfig, HalveEveryIsFractionOfStage) {
  TrainConfig c;
  EXPECT_EQ(halve_every(c, 1000), 400);
  EXPECT_GE(halve_every(c, 1), 1);
}

TEST(TrainConfig, DerivedModelConfigs) {
  const TrainConfig c = toy_config();
  EXPECT_EQ(den_config(c, true).in_channels, c.mln_channels);
  EXPECT_EQ(den_config(c, false).in_channels, 3);
  EXPECT_EQ(rdan_config(c).idr_dim, c.idr_dim);
  EXPECT_EQ(mln_config(c).channels, c.mln_channels);
}

TEST(Stages, DeterministicFromSeed) {
  const TrainConfig c = tiny_config();
  const HrSource src = make_hr_source(c);
  const MlnModel a = train_stage1(c, src);
  const MlnModel b = train_stage1(c, src);
  EXPECT_EQ(a.params, b.params);
  const TeacherModel ta = train_stage2_teacher(c, a, src);
  const TeacherModel tb = train_stage2_teacher(c, b, src);
  EXPECT_EQ(ta.den.params, tb.den.params);
  EXPECT_EQ(ta.rdan.params, tb.rdan.params);
  TrainConfig other = c;
  other.seed = c.seed + 1;
  EXPECT_FALSE(train_stage1(other, src).params == a.params);
}

TEST(Stages, LaterStagesLeaveEarlierModelsUnchanged) {
  const TrainConfig c = tiny_config();
  const HrSource src = make_hr_source(c);
  StageLog l1, l2, l3;
  const MlnModel mln = train_stage1(c, src, &l1);
  const ParamSet mln_before = mln.params;
  for (const auto& e : mln.params) EXPECT_EQ(e.meta_mask, !is_upscaler_entry(e.name));
  const TeacherModel t = train_stage2_teacher(c, mln, src, &l2);
  EXPECT_EQ(mln.params, mln_before);
  const ParamSet den_t = t.den.params, rdan_t = t.rdan.params;
  const StudentModel s0 = init_student(c, t);
  EXPECT_EQ(s0.rdan.params, t.rdan.params);
  const StudentModel s = train_stage3_student(c, mln, t, src, &l3);
  EXPECT_EQ(mln.params, mln_before);
  EXPECT_EQ(t.den.params, den_t);
  EXPECT_EQ(t.rdan.params, rdan_t);
  EXPECT_FALSE(s.den.params == s0.den.params);
  EXPECT_EQ(l2.rows.size(), 4u);
  EXPECT_EQ(l3.rows.size(), 4u);
  EXPECT_FALSE(l1.columns.empty());
}

TEST(Stages, TeacherFeatureShapes) {
  const TrainConfig c = tiny_config();
  const HrSource src = make_hr_source(c);
  const MlnModel mln = train_stage1(c, src);
  Rng rng(3);
  const Pairs batch = make_pairs(src, make_sampler(c)(rng), 2, c.patch_size, rng);
  EXPECT_EQ(teacher_feature(c, mln, batch).shape(), (Shape{2, c.mln_channels, c.patch_size, c.patch_size}));
  const TeacherModel t = init_teacher(c);
  EXPECT_EQ(teacher_idr(c, mln, t.den, batch).shape(), (Shape{2, c.idr_dim}));
  const double gap = mean_kd_gap(c, mln, t, init_student(c, t).den, src, 3, 5);
  EXPECT_GT(gap, 0.0);
  EXPECT_EQ(gap, mean_kd_gap(c, mln, t, init_student(c, t).den, src, 3, 5));
}

TEST(Checkpoints, RoundTripAndMismatch) {
  const TrainConfig c = tiny_config();
  const MlnModel mln = [&] {
    MlnModel m = mln_init(mln_config(c), 1);
    freeze_upscaler(m.params);
    return m;
  }();
  const TeacherModel t = init_teacher(c);
  const auto p1 = temp_path("mln.ckpt"), p2 = temp_path("teacher.ckpt");
  save_mln(p1, mln, {{"stage", 1}});
  save_den_rdan(p2, t.den, t.rdan, {{"stage", 2}});
  nlohmann::json meta;
  const MlnModel m2 = load_mln(p1, &meta);
  EXPECT_EQ(m2.params, mln.params);
  EXPECT_EQ(m2.config.channels, c.mln_channels);
  EXPECT_EQ(meta["stage"], 1);
  const auto [den, rdan] = load_den_rdan(p2);
  EXPECT_EQ(den.params, t.den.params);
  EXPECT_EQ(rdan.params, t.rdan.params);
  EXPECT_EQ(rdan.config.blocks, c.rdan_blocks);
  EXPECT_THROW(load_den_rdan(p1), std::runtime_error);
  EXPECT_THROW(load_mln(p2), std::runtime_error);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST(StageLog, WritesCsv) {
  StageLog log{{"step", "loss"}, {{0, 0.5}, {1, 0.25}}};
  const auto path = temp_path("log.csv");
  log.write_csv(path);
  std::ifstream f(path);
  std::string header, row;
  std::getline(f, header);
  std::getline(f, row);
  EXPECT_EQ(header, "step,loss");
  EXPECT_EQ(row.substr(0, 2), "0,");
  std::filesystem::remove(path);
}
