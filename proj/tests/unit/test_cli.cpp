#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cli/commands.hpp"
#include "mrda/hash.hpp"

namespace fs = std::filesystem;
using mrda::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result mrda_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mrda");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("mrda_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    config_ = root_ / "tiny.json";
    std::ofstream(config_) << R"({"batch_size": 2, "patch_size": 6, "mln_channels": 4, "den_channels": 4,
      "idr_dim": 6, "rdan_channels": 4, "rdan_blocks": 1, "bicubic_steps": 4, "meta_epochs": 2, "tasks": 2,
      "inner_steps": 2, "support_size": 1, "query_size": 1, "stage2_steps": 3, "stage3_steps": 3,
      "hr_count": 2, "hr_size": 32, "widths": [0.5, 2.0]})";
  }
  void TearDown() override { fs::remove_all(root_); }

  std::vector<std::string> common(const std::string& run_name) const {
    return {"--toy", "--config", config_.string(), "--run-dir", (root_ / run_name).string()};
  }
  Result cmd(const std::string& sub, const std::string& run_name, std::vector<std::string> extra = {}) const {
    std::vector<std::string> args{sub};
    for (const auto& a : common(run_name)) args.push_back(a);
    for (auto& a : extra) args.push_back(std::move(a));
    return mrda_cli(args);
  }

  fs::path root_;
  fs::path config_;
};

}  // namespace

TEST_F(CliTest, HelpAndUnknownCommands) {
  EXPECT_EQ(mrda_cli({"--help"}).code, 0);
  EXPECT_EQ(mrda_cli({}).code, 1);
  EXPECT_EQ(mrda_cli({"train-everything"}).code, 1);
  EXPECT_EQ(mrda_cli({"synth", "--no-such-flag"}).code, 1);
}

TEST_F(CliTest, SynthIsDeterministic) {
  const auto a = cmd("synth", "a", {"--count", "3", "--seed", "5"});
  const auto b = cmd("synth", "b", {"--count", "3", "--seed", "5", "--workers", "2"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(root_ / "a" / "synth" / "manifest.jsonl"), slurp(root_ / "b" / "synth" / "manifest.jsonl"));
  EXPECT_EQ(mrda::hash_file(root_ / "a" / "synth" / "lr" / "0002.png"),
            mrda::hash_file(root_ / "b" / "synth" / "lr" / "0002.png"));
  const auto c = cmd("synth", "c", {"--count", "3", "--seed", "6"});
  EXPECT_NE(slurp(root_ / "a" / "synth" / "manifest.jsonl"), slurp(root_ / "c" / "synth" / "manifest.jsonl"));
  std::ifstream f(root_ / "a" / "synth" / "manifest.jsonl");
  std::string line;
  std::getline(f, line);
  const auto j = nlohmann::json::parse(line);
  EXPECT_TRUE(j.contains("spec"));
  EXPECT_TRUE(j.contains("lr_hash"));
}

TEST_F(CliTest, UnsupportedScaleIsUserError) {
  const auto r = cmd("synth", "s", {"--scale", "3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("scale"), std::string::npos);
}

TEST_F(CliTest, MissingConfigFileIsUserError) {
  const auto r = mrda_cli({"stage1", "--config", (root_ / "absent.json").string(), "--run-dir", root_.string()});
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, Stage2RequiresStage1) {
  const auto r = cmd("stage2", "r");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("stage1"), std::string::npos);
  EXPECT_EQ(cmd("stage3", "r").code, 1);
}

TEST_F(CliTest, PipelineLineageEvalAndExport) {
  ASSERT_EQ(cmd("stage1", "p").code, 0);
  ASSERT_EQ(cmd("stage2", "p").code, 0);
  ASSERT_EQ(cmd("stage3", "p").code, 0);
  const fs::path run = root_ / "p";
  for (const auto& p : {mrda::cli::stage1_checkpoint(run), mrda::cli::stage2_checkpoint(run),
                        mrda::cli::stage3_checkpoint(run)})
    EXPECT_TRUE(fs::exists(p)) << p;
  std::ifstream mf(run / "manifest.json");
  const auto manifest = nlohmann::json::parse(mf);
  const std::string h1 = manifest["lineage"]["stage1"]["hash"];
  const std::string h2 = manifest["lineage"]["stage2"]["hash"];
  EXPECT_EQ(h1, mrda::hash_file(mrda::cli::stage1_checkpoint(run)));
  EXPECT_EQ(manifest["lineage"]["stage2"]["parents"], nlohmann::json::array({h1}));
  EXPECT_EQ(manifest["lineage"]["stage3"]["parents"], nlohmann::json::array({h1, h2}));
  EXPECT_EQ(manifest["runs"].size(), 3u);

  const std::vector<std::string> eval_args{"--count", "1", "--image-size", "32", "--widths", "1.0,2.0"};
  ASSERT_EQ(cmd("eval", "p", eval_args).code, 0);
  const std::string first = slurp(run / "eval" / "report.json");
  ASSERT_EQ(cmd("eval", "p", eval_args).code, 0);
  EXPECT_EQ(slurp(run / "eval" / "report.json"), first);
  EXPECT_NE(first.find("iso_1.000"), std::string::npos);

  const auto ex = cmd("export-idr", "p", {"--count", "2", "--image-size", "32"});
  ASSERT_EQ(ex.code, 0) << ex.err;
  EXPECT_NE(ex.out.find("separability"), std::string::npos);
  std::ifstream jf(run / "export" / "idr_student.jsonl");
  std::set<std::string> labels;
  for (std::string line; std::getline(jf, line);) labels.insert(nlohmann::json::parse(line)["label"].get<std::string>());
  EXPECT_EQ(labels, (std::set<std::string>{"iso_0.500", "iso_2.000", "iso_3.500"}));
  ASSERT_EQ(cmd("export-idr", "p", {"--count", "2", "--image-size", "32", "--path", "teacher", "--untrained"}).code,
            0);
  EXPECT_TRUE(fs::exists(run / "export" / "idr_teacher_untrained.jsonl"));

  const auto curve = cmd("adapt-curve", "p", {"--tasks", "2", "--max-steps", "3"});
  ASSERT_EQ(curve.code, 0) << curve.err;
  std::ifstream cf(run / "adapt" / "curve.csv");
  std::string header;
  std::getline(cf, header);
  EXPECT_EQ(header, "steps,psnr");
}

TEST_F(CliTest, EvalRejectsIncompatibleCheckpoint) {
  ASSERT_EQ(cmd("stage1", "m").code, 0);
  ASSERT_EQ(cmd("stage2", "m").code, 0);
  ASSERT_EQ(cmd("stage3", "m").code, 0);
  const auto r = cmd("eval", "m", {"--scale", "2", "--count", "1", "--image-size", "32"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("scale"), std::string::npos);
}
