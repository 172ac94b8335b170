#include <cstdio>

#include "condgan/checkpoint.hpp"
#include "condgan/data.hpp"
#include "condgan/errors.hpp"

namespace condgan {

namespace {

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
         std::uint32_t{b[at + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

void check_magic(std::span<const std::uint8_t> bytes, std::uint32_t expected, const char* kind) {
  if (bytes.size() < 4) throw ParseError(std::string("IDX ") + kind + " file too short for magic number", bytes.size());
  const std::uint32_t magic = be32(bytes, 0);
  if (magic != expected) {
    throw ParseError(std::string("IDX ") + kind + " file has magic " + hex32(magic) + ", expected " + hex32(expected), 0);
  }
}

void check_length(std::span<const std::uint8_t> bytes, std::uint64_t expected, const char* kind) {
  if (bytes.size() < expected) {
    throw ParseError(std::string("IDX ") + kind + " file truncated: header declares " + std::to_string(expected) +
                         " bytes, file has " + std::to_string(bytes.size()),
                     bytes.size());
  }
  if (bytes.size() > expected) {
    throw ParseError(std::string("IDX ") + kind + " file has " + std::to_string(bytes.size() - expected) +
                         " trailing bytes beyond the declared payload",
                     expected);
  }
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxImageMagic, "image");
  if (bytes.size() < 16) throw ParseError("IDX image header truncated", bytes.size());
  IdxImages out;
  out.count = be32(bytes, 4);
  out.rows = be32(bytes, 8);
  out.cols = be32(bytes, 12);
  if (out.count == 0) throw ParseError("IDX image count is zero", 4);
  if (out.rows == 0) throw ParseError("IDX image row count is zero", 8);
  if (out.cols == 0) throw ParseError("IDX image column count is zero", 12);
  const std::uint64_t payload = std::uint64_t{out.count} * out.rows * out.cols;
  check_length(bytes, 16 + payload, "image");
  out.pixels.assign(bytes.begin() + 16, bytes.end());
  return out;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxLabelMagic, "label");
  if (bytes.size() < 8) throw ParseError("IDX label header truncated", bytes.size());
  const std::uint32_t count = be32(bytes, 4);
  if (count == 0) throw ParseError("IDX label count is zero", 4);
  check_length(bytes, 8 + std::uint64_t{count}, "label");
  return {bytes.begin() + 8, bytes.end()};
}

std::vector<std::uint8_t> encode_idx_images(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  put_be32(out, kIdxImageMagic);
  put_be32(out, images.count);
  put_be32(out, images.rows);
  put_be32(out, images.cols);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                        std::size_t num_classes) {
  if (!std::filesystem::exists(images_path)) throw DataError("IDX image file not found: " + images_path.string());
  if (!std::filesystem::exists(labels_path)) throw DataError("IDX label file not found: " + labels_path.string());
  const auto image_bytes = read_file_bytes(images_path);
  const auto label_bytes = read_file_bytes(labels_path);
  const IdxImages images = parse_idx_images(image_bytes);
  const auto labels = parse_idx_labels(label_bytes);
  if (labels.size() != images.count) {
    throw ParseError("IDX label count " + std::to_string(labels.size()) + " does not match image count " +
                         std::to_string(images.count),
                     4);
  }
  std::vector<std::size_t> idx(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw ParseError("label " + std::to_string(labels[i]) + " exceeds class count " + std::to_string(num_classes), 8 + i);
    }
    idx[i] = labels[i];
  }
  std::vector<double> pixels(images.pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = scale_pixel(images.pixels[i]);

  DatasetMetadata meta;
  meta.name = images_path.filename().string();
  meta.source_checksum = sha256_hex(sha256_hex(image_bytes) + sha256_hex(label_bytes));
  return LabeledDataset(Tensor({images.count, images.rows, images.cols, 1}, std::move(pixels)),
                        one_hot_rows(idx, num_classes), std::move(meta));
}

}  // namespace condgan
