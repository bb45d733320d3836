#include "run_manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "mrda/hash.hpp"

namespace mrda::cli {

namespace fs = std::filesystem;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest::RunManifest(fs::path run_dir) : run_dir_(std::move(run_dir)) {
  doc_ = {{"runs", nlohmann::json::array()}, {"lineage", nlohmann::json::object()}};
}

RunManifest RunManifest::open(const fs::path& run_dir) {
  RunManifest m(run_dir);
  std::ifstream in(m.path());
  if (in) {
    m.doc_ = nlohmann::json::parse(in);
    if (!m.doc_.contains("runs")) m.doc_["runs"] = nlohmann::json::array();
    if (!m.doc_.contains("lineage")) m.doc_["lineage"] = nlohmann::json::object();
  }
  return m;
}

namespace {

nlohmann::json artifacts_json(const std::vector<Artifact>& list) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& x : list) a.push_back({{"path", x.path}, {"hash", x.hash}});
  return a;
}

}  // namespace

void RunManifest::add(const RunRecord& r) {
  doc_["runs"].push_back({{"command", r.command},
                          {"config_hash", r.config_hash},
                          {"seed", r.seed},
                          {"started", r.started},
                          {"finished", r.finished},
                          {"inputs", artifacts_json(r.inputs)},
                          {"outputs", artifacts_json(r.outputs)}});
}

void RunManifest::set_lineage(const std::string& stage, const Artifact& checkpoint,
                              const std::vector<std::string>& parents) {
  doc_["lineage"][stage] = {{"checkpoint", checkpoint.path}, {"hash", checkpoint.hash}, {"parents", parents}};
}

void RunManifest::save() const {
  fs::create_directories(run_dir_);
  const fs::path tmp = path().string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << doc_.dump(2) << "\n";
  }
  fs::rename(tmp, path());
}

Artifact RunManifest::artifact(const fs::path& file) const {
  const fs::path rel = file.lexically_relative(run_dir_);
  const bool inside = !rel.empty() && *rel.begin() != "..";
  return {inside ? rel.generic_string() : file.generic_string(), hash_file(file)};
}

}  // namespace mrda::cli
