#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mrda::cli {

struct Artifact {
  std::string path;  // relative to the run directory when inside it
  std::string hash;
};

/// One command invocation recorded in <run>/manifest.json.
struct RunRecord {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<Artifact> inputs;
  std::vector<Artifact> outputs;
};

/// Append-only log of commands plus the checkpoint lineage
/// stage1 -> stage2 -> stage3. Stored as JSON in the run directory.
class RunManifest {
 public:
  explicit RunManifest(std::filesystem::path run_dir);

  /// Reads an existing manifest.json or starts an empty one.
  static RunManifest open(const std::filesystem::path& run_dir);

  void add(const RunRecord& record);
  /// Records a stage checkpoint and the hashes of its parents.
  void set_lineage(const std::string& stage, const Artifact& checkpoint, const std::vector<std::string>& parents);
  void save() const;

  const nlohmann::json& json() const { return doc_; }
  std::filesystem::path path() const { return run_dir_ / "manifest.json"; }

  /// Hashes a file and expresses its path relative to the run directory.
  Artifact artifact(const std::filesystem::path& file) const;

 private:
  std::filesystem::path run_dir_;
  nlohmann::json doc_;
};

/// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace mrda::cli
