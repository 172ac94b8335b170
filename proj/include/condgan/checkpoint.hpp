#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "condgan/tensor.hpp"

namespace condgan {

// Self-describing binary container used for model checkpoints, dataset
// caches, and sample files.  All integers and doubles are little-endian:
//
//   bytes 0..7   magic "CGANCKPT"
//   u32          format version (kContainerVersion)
//   u64          header length H, then H bytes of UTF-8 JSON
//   u32          tensor count T, then T records of
//                  u32 name length, name bytes,
//                  u32 rank, rank x u64 extents,
//                  prod(extents) x f64 values
struct Container {
  nlohmann::json header = nlohmann::json::object();
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const;
  bool has(const std::string& name) const;
};

inline constexpr std::uint32_t kContainerVersion = 1;

std::vector<unsigned char> encode_container(const Container& c);
Container decode_container(const std::vector<unsigned char>& bytes);

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::vector<unsigned char>& bytes);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace condgan
