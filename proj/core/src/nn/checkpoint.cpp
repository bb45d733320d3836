#include "mrda/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mrda::nn {
namespace {

constexpr std::array<char, 8> kMagic = {'M', 'R', 'D', 'A', 'C', 'K', 'P', 'T'};

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const nlohmann::json& meta) {
  nlohmann::json manifest;
  manifest["version"] = kCheckpointVersion;
  manifest["meta"] = meta;
  manifest["entries"] = nlohmann::json::array();
  std::string payload;
  for (const auto& e : params) {
    const std::size_t offset = payload.size();
    for (float f : e.value.values()) put_le(payload, std::bit_cast<std::uint32_t>(f));
    manifest["entries"].push_back({{"name", e.name},
                                   {"shape", e.value.shape()},
                                   {"dtype", "f32"},
                                   {"meta_mask", e.meta_mask},
                                   {"offset", offset},
                                   {"nbytes", payload.size() - offset}});
  }
  const std::string text = manifest.dump();
  std::string header(kMagic.begin(), kMagic.end());
  put_le(header, kCheckpointVersion);
  put_le(header, static_cast<std::uint64_t>(text.size()));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  constexpr std::size_t kHeader = 8 + 4 + 8;
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw std::runtime_error(path.string() + " is not an mrda checkpoint");
  }
  const auto version = get_le<std::uint32_t>(p + 8);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version) + " in " + path.string());
  }
  const auto mlen = get_le<std::uint64_t>(p + 12);
  if (kHeader + mlen > bytes.size()) throw std::runtime_error("truncated checkpoint manifest in " + path.string());
  const nlohmann::json manifest = nlohmann::json::parse(bytes.substr(kHeader, mlen));
  const std::size_t payload = kHeader + mlen;

  Checkpoint ckpt;
  ckpt.meta = manifest.value("meta", nlohmann::json::object());
  for (const auto& e : manifest.at("entries")) {
    if (e.at("dtype") != "f32") throw std::runtime_error("unsupported dtype in checkpoint");
    const Shape shape = e.at("shape").get<Shape>();
    const std::size_t offset = e.at("offset").get<std::size_t>();
    const std::size_t nbytes = e.at("nbytes").get<std::size_t>();
    const std::size_t n = shape_numel(shape);
    if (nbytes != n * 4 || payload + offset + nbytes > bytes.size()) {
      throw std::runtime_error("corrupt entry " + e.at("name").get<std::string>() + " in " + path.string());
    }
    std::vector<float> data(n);
    for (std::size_t i = 0; i < n; ++i) {
      data[i] = std::bit_cast<float>(get_le<std::uint32_t>(p + payload + offset + 4 * i));
    }
    ckpt.params.add(e.at("name").get<std::string>(), Tensor<float>(shape, std::move(data)),
                    e.at("meta_mask").get<bool>());
  }
  return ckpt;
}

ParamSet extract_prefixed(const ParamSet& params, const std::string& prefix) {
  ParamSet out;
  for (const auto& e : params) {
    if (e.name.rfind(prefix, 0) == 0) out.add(e.name.substr(prefix.size()), e.value, e.meta_mask);
  }
  return out;
}

void merge_prefixed(ParamSet& into, const ParamSet& part, const std::string& prefix) {
  for (const auto& e : part) into.add(prefix + e.name, e.value, e.meta_mask);
}

}  // namespace mrda::nn
