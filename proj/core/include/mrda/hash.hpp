#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace mrda {

/// 64-bit FNV-1a. Used for config hashes and checkpoint lineage, not for security.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
std::string hash_file(const std::filesystem::path& path);

}  // namespace mrda
