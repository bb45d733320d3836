#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "mrda/nn/param_set.hpp"

namespace mrda::nn {

// Checkpoint layout (all integers little-endian):
//   8 bytes   magic "MRDACKPT"
//   u32       format version
//   u64       manifest length in bytes
//   manifest  UTF-8 JSON: {"version", "meta", "entries": [{name, shape, dtype,
//             meta_mask, offset, nbytes}]}
//   payload   raw little-endian float32 arrays; offsets are relative to the
//             first payload byte
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  ParamSet params;
};

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const nlohmann::json& meta);
/// Throws std::runtime_error on malformed files or unsupported versions.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Entries whose names start with `prefix`, with the prefix removed.
ParamSet extract_prefixed(const ParamSet& params, const std::string& prefix);
/// Appends every entry of `part` to `into` under `prefix`.
void merge_prefixed(ParamSet& into, const ParamSet& part, const std::string& prefix);

}  // namespace mrda::nn
