#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "condgan/rng.hpp"
#include "condgan/tensor.hpp"

namespace condgan {

struct ImageShape {
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t channels = 1;

  std::size_t pixels() const noexcept { return height * width; }
  std::size_t flat() const noexcept { return height * width * channels; }
  Shape shape() const { return {height, width, channels}; }

  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

inline constexpr const char* kTanhScale = "uint8 x -> x/127.5 - 1 (tanh range [-1, 1])";

struct DatasetMetadata {
  std::string name;
  std::string source_checksum;  // sha256 over the source files, or of the generating spec
  std::string scale_convention = kTanhScale;
  std::vector<std::string> label_names;
};

// images [count, h, w, d] in [-1, 1]; labels [count, m] one-hot.
struct LabeledDataset {
  Tensor images;
  Tensor labels;
  DatasetMetadata meta;

  LabeledDataset(Tensor images, Tensor labels, DatasetMetadata meta);

  std::size_t count() const { return images.dim(0); }
  std::size_t condition_dim() const { return labels.dim(1); }
  ImageShape image_shape() const;
  std::size_t label_of(std::size_t i) const;
  std::vector<std::size_t> label_indices() const;
  /// Rows at the given indices, in that order.
  LabeledDataset subset(std::span<const std::size_t> indices) const;
  /// Images flattened to [count, h*w*d].
  Tensor flat_images() const;
  /// Row indices whose label is `condition`, ascending; may be empty.
  std::vector<std::size_t> indices_with_label(std::size_t condition) const;
};

Tensor one_hot_rows(std::span<const std::size_t> labels, std::size_t m);

// ---- MNIST IDX ---------------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxImages {
  std::uint32_t count = 0, rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;
};

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_idx_images(const IdxImages& images);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

/// Loads an IDX image/label pair; labels are one-hot encoded over
/// `num_classes` classes and pixels are scaled to [-1, 1].
LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                        std::size_t num_classes = 10);

double scale_pixel(std::uint8_t byte) noexcept;
/// Inverse of scale_pixel on the uint8 lattice.
std::uint8_t unscale_pixel(double value) noexcept;

// ---- CIFAR-10 binary ---------------------------------------------------------

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarPlane = kCifarSide * kCifarSide;
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * kCifarPlane;
extern const std::array<const char*, 10> kCifarLabelNames;

LabeledDataset parse_cifar10_binary(std::span<const std::uint8_t> bytes, std::string_view source = "cifar10");
LabeledDataset load_cifar10_binary(std::span<const std::filesystem::path> paths);
/// Re-encodes record i of a parsed CIFAR-10 dataset to its 3073 source bytes.
std::vector<std::uint8_t> encode_cifar10_record(const LabeledDataset& data, std::size_t i);

// ---- Synthetic Gaussian mixtures ---------------------------------------------

struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> variance;  // diagonal
};

struct MixtureSpec {
  std::size_t dimension = 2;
  /// components[c] is the mixture for condition c.
  std::vector<std::vector<MixtureComponent>> components;

  std::size_t condition_count() const noexcept { return components.size(); }
  /// InputError on empty conditions, non-positive weights/variances, weights
  /// not summing to 1, or dimension mismatches.
  void validate() const;
};

// Exact density and sampler for a MixtureSpec.
class MixtureOracle {
 public:
  explicit MixtureOracle(MixtureSpec spec);

  const MixtureSpec& spec() const noexcept { return spec_; }
  /// log p(x | c) of the untruncated mixture.
  double log_density(std::span<const double> x, std::size_t condition) const;
  /// `count` draws [count, D] from p(x | c), rejecting draws outside [-1, 1]^D.
  Tensor sample(std::size_t condition, std::size_t count, Rng& rng) const;

 private:
  MixtureSpec spec_;
};

struct SyntheticData {
  LabeledDataset dataset;
  std::shared_ptr<const MixtureOracle> oracle;
};

/// count_per_condition draws per condition, embedded as 1x1xD images and
/// interleaved condition by condition.
SyntheticData synth_mixture(const MixtureSpec& spec, std::size_t count_per_condition, std::uint64_t seed);

/// Three conditions on a circle, two Gaussian components each, D = 2.
MixtureSpec mixture_3x2_spec();

// ---- Splits and presets ------------------------------------------------------

struct SplitFractions {
  double train = 0.8, valid = 0.1, test = 0.1;
};

struct SplitIndices {
  std::vector<std::size_t> train, valid, test;
};

struct DatasetSplits {
  LabeledDataset train, valid, test;
};

/// Stratified, seeded split.  Each label's rows are shuffled and divided by
/// largest-remainder rounding, so each part holds its share within one row.
SplitIndices split_indices(const LabeledDataset& data, SplitFractions fractions, std::uint64_t seed);
DatasetSplits split(const LabeledDataset& data, SplitFractions fractions, std::uint64_t seed);

/// Mean pooling with a square window after cropping `crop` pixels per border.
LabeledDataset average_pool(const LabeledDataset& data, std::size_t crop, std::size_t window);

struct PresetData {
  DatasetSplits splits;
  std::shared_ptr<const MixtureOracle> oracle;  // only for synthetic presets
  std::string checksum;
};

/// Names accepted by load_preset.
std::vector<std::string> preset_names();
/// Resolves a named dataset ("tiny-mnist-3", "mixture-3x2", "mnist",
/// "cifar10") against `data_dir`.  DataError when files are missing.
PresetData load_preset(const std::string& name, const std::filesystem::path& data_dir);

}  // namespace condgan
