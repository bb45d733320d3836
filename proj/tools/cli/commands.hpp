#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrda/training.hpp"

namespace mrda::cli {

/// Bad flags, missing inputs or incompatible artifacts. Maps to exit code 1.
struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode { kOk = 0, kUserError = 1, kInternalError = 2 };

/// Environment variable naming the directory that holds runs.
inline constexpr const char* kRunRootEnv = "MRDA_RUN_ROOT";

/// $MRDA_RUN_ROOT, or ./runs when unset.
std::filesystem::path run_root();
/// <run root>/default.
std::filesystem::path default_run_dir();

struct CommonOptions {
  std::optional<std::string> config;  // JSON file
  bool toy = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<int> scale;
  std::string run_dir;  // empty selects default_run_dir()
  int workers = 1;
};

std::filesystem::path resolve_run_dir(const CommonOptions& o);

/// Layering: defaults (or the toy preset), then the run's saved config.json,
/// then --config, then individual flags. Validates the result.
TrainConfig resolve_config(const CommonOptions& o);

// Fixed artifact locations inside a run directory.
std::filesystem::path stage1_checkpoint(const std::filesystem::path& run);
std::filesystem::path stage2_checkpoint(const std::filesystem::path& run);
std::filesystem::path stage3_checkpoint(const std::filesystem::path& run);

struct SynthOptions {
  CommonOptions common;
  int count = 10;
  std::string out_dir;  // empty: <run>/synth
};
void cmd_synth(const SynthOptions& o, std::ostream& log);

struct StageOptions {
  CommonOptions common;
};
void cmd_stage1(const StageOptions& o, std::ostream& log);
void cmd_stage2(const StageOptions& o, std::ostream& log);
void cmd_stage3(const StageOptions& o, std::ostream& log);

struct EvalOptions {
  CommonOptions common;
  std::string checkpoint;  // empty: stage3 checkpoint of the run
  std::string suite = "gaussian8";
  std::vector<double> widths;  // overrides the suite when set
  std::string hr_dir;          // empty: synthetic evaluation images
  int count = 8;
  int image_size = 128;
  std::string out_dir;  // empty: <run>/eval
};
void cmd_eval(const EvalOptions& o, std::ostream& log);

struct ExportOptions {
  CommonOptions common;
  std::string path = "student";  // or "teacher"
  bool untrained = false;        // export through a freshly initialized DEN
  std::vector<double> widths{0.5, 2.0, 3.5};
  std::string hr_dir;
  int count = 10;
  int image_size = 128;
  std::string out;  // empty: <run>/export/idr_<path>[_untrained].jsonl
};
/// Returns the separability score of the written export.
double cmd_export_idr(const ExportOptions& o, std::ostream& log);

struct CurveOptions {
  CommonOptions common;
  std::vector<double> widths{0.5, 1.5, 2.5, 3.5};
  int tasks = 20;
  int max_steps = 10;
  std::string out;  // empty: <run>/adapt/curve.csv
};
std::vector<std::pair<int, double>> cmd_adapt_curve(const CurveOptions& o, std::ostream& log);

/// Parses argv-style arguments (args[0] is the program name), runs the
/// command and maps exceptions onto exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mrda::cli
