#include "condgan/checkpoint.hpp"
#include "condgan/data.hpp"
#include "condgan/errors.hpp"

namespace condgan {

const std::array<const char*, 10> kCifarLabelNames = {"airplane", "automobile", "bird",  "cat",  "deer",
                                                      "dog",      "frog",       "horse", "ship", "truck"};

LabeledDataset parse_cifar10_binary(std::span<const std::uint8_t> bytes, std::string_view source) {
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0) {
    throw ParseError("CIFAR-10 file '" + std::string(source) + "' has " + std::to_string(bytes.size()) +
                         " bytes, expected a positive multiple of " + std::to_string(kCifarRecordBytes),
                     bytes.size() - bytes.size() % kCifarRecordBytes);
  }
  const std::size_t n = bytes.size() / kCifarRecordBytes;
  Tensor images({n, kCifarSide, kCifarSide, 3});
  std::vector<std::size_t> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t base = r * kCifarRecordBytes;
    if (bytes[base] > 9) {
      throw ParseError("CIFAR-10 label byte " + std::to_string(bytes[base]) + " outside 0..9", base);
    }
    labels[r] = bytes[base];
    // Source is channel-planar (R plane, G plane, B plane); store interleaved.
    for (std::size_t ch = 0; ch < 3; ++ch)
      for (std::size_t p = 0; p < kCifarPlane; ++p)
        images[(r * kCifarPlane + p) * 3 + ch] = scale_pixel(bytes[base + 1 + ch * kCifarPlane + p]);
  }
  DatasetMetadata meta;
  meta.name = std::string(source);
  meta.source_checksum = sha256_hex(std::vector<unsigned char>(bytes.begin(), bytes.end()));
  meta.label_names.assign(kCifarLabelNames.begin(), kCifarLabelNames.end());
  return LabeledDataset(std::move(images), one_hot_rows(labels, 10), std::move(meta));
}

LabeledDataset load_cifar10_binary(std::span<const std::filesystem::path> paths) {
  if (paths.empty()) throw DataError("no CIFAR-10 files given");
  std::vector<std::uint8_t> all;
  std::string checksums;
  for (const auto& path : paths) {
    if (!std::filesystem::exists(path)) throw DataError("CIFAR-10 file not found: " + path.string());
    const auto bytes = read_file_bytes(path);
    // Validate each file on its own so errors name the offending file.
    parse_cifar10_binary(bytes, path.string());
    checksums += sha256_hex(bytes);
    all.insert(all.end(), bytes.begin(), bytes.end());
  }
  LabeledDataset data = parse_cifar10_binary(all, "cifar10");
  data.meta.source_checksum = sha256_hex(checksums);
  return data;
}

std::vector<std::uint8_t> encode_cifar10_record(const LabeledDataset& data, std::size_t i) {
  if (data.image_shape() != ImageShape{kCifarSide, kCifarSide, 3}) throw DimensionError("not a CIFAR-10 shaped dataset");
  std::vector<std::uint8_t> out(kCifarRecordBytes);
  out[0] = static_cast<std::uint8_t>(data.label_of(i));
  for (std::size_t ch = 0; ch < 3; ++ch)
    for (std::size_t p = 0; p < kCifarPlane; ++p)
      out[1 + ch * kCifarPlane + p] = unscale_pixel(data.images[(i * kCifarPlane + p) * 3 + ch]);
  return out;
}

}  // namespace condgan
