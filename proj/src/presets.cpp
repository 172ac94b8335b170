#include "condgan/checkpoint.hpp"
#include "condgan/data.hpp"
#include "condgan/errors.hpp"

namespace condgan {

namespace {

constexpr std::uint64_t kPresetSplitSeed = 1234;
constexpr std::uint64_t kMixtureSeed = 2017;

std::filesystem::path find_mnist_dir(const std::filesystem::path& data_dir) {
  for (const char* sub : {"mnist", "mnist-subset"}) {
    const auto dir = data_dir / sub;
    if (std::filesystem::exists(dir / "train-images-idx3-ubyte")) return dir;
  }
  throw DataError("no MNIST IDX files (train-images-idx3-ubyte) under " + (data_dir / "mnist").string() + " or " +
                  (data_dir / "mnist-subset").string());
}

LabeledDataset load_mnist_train(const std::filesystem::path& data_dir) {
  const auto dir = find_mnist_dir(data_dir);
  return load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", 10);
}

PresetData tiny_mnist_3(const std::filesystem::path& data_dir) {
  constexpr std::size_t kPerLabel = 700;
  const LabeledDataset full = load_mnist_train(data_dir);
  const auto labels = full.label_indices();
  std::vector<std::size_t> keep;
  std::array<std::size_t, 3> seen{};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 3 && seen[labels[i]] < kPerLabel) {
      ++seen[labels[i]];
      keep.push_back(i);
    }
  }
  for (std::size_t c = 0; c < 3; ++c) {
    if (seen[c] < kPerLabel) {
      throw DataError("tiny-mnist-3 needs " + std::to_string(kPerLabel) + " images of digit " + std::to_string(c) +
                      ", found " + std::to_string(seen[c]));
    }
  }
  const LabeledDataset picked = full.subset(keep);
  std::vector<std::size_t> relabel;
  for (auto i : keep) relabel.push_back(labels[i]);
  DatasetMetadata meta = picked.meta;
  meta.name = "tiny-mnist-3";
  meta.label_names = {"0", "1", "2"};
  meta.scale_convention = std::string(kTanhScale) + "; 28x28 cropped to 24x24, 3x3 mean-pooled to 8x8";
  // 28x28 -> crop 2 -> 24x24 -> 3x3 mean -> 8x8
  LabeledDataset pooled = average_pool(LabeledDataset(picked.images, one_hot_rows(relabel, 3), meta), 2, 3);
  PresetData out{split(pooled, {5.0 / 7.0, 1.0 / 7.0, 1.0 / 7.0}, kPresetSplitSeed), nullptr, meta.source_checksum};
  return out;
}

PresetData mixture_3x2() {
  auto synthetic = synth_mixture(mixture_3x2_spec(), 1000, kMixtureSeed);
  synthetic.dataset.meta.name = "mixture-3x2";
  const std::string checksum = synthetic.dataset.meta.source_checksum;
  return {split(synthetic.dataset, {0.6, 0.2, 0.2}, kPresetSplitSeed), synthetic.oracle, checksum};
}

PresetData mnist(const std::filesystem::path& data_dir) {
  LabeledDataset full = load_mnist_train(data_dir);
  full.meta.name = "mnist";
  const std::string checksum = full.meta.source_checksum;
  return {split(full, {0.8, 0.1, 0.1}, kPresetSplitSeed), nullptr, checksum};
}

PresetData cifar10(const std::filesystem::path& data_dir) {
  const auto dir = data_dir / "cifar-10-batches-bin";
  std::vector<std::filesystem::path> files;
  for (int i = 1; i <= 5; ++i) files.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
  files.push_back(dir / "test_batch.bin");
  LabeledDataset full = load_cifar10_binary(files);
  const std::string checksum = full.meta.source_checksum;
  return {split(full, {0.8, 0.1, 0.1}, kPresetSplitSeed), nullptr, checksum};
}

}  // namespace

std::vector<std::string> preset_names() { return {"tiny-mnist-3", "mixture-3x2", "mnist", "cifar10"}; }

PresetData load_preset(const std::string& name, const std::filesystem::path& data_dir) {
  if (name == "tiny-mnist-3") return tiny_mnist_3(data_dir);
  if (name == "mixture-3x2") return mixture_3x2();
  if (name == "mnist") return mnist(data_dir);
  if (name == "cifar10") return cifar10(data_dir);
  throw ConfigError("unknown dataset '" + name + "' (known: tiny-mnist-3, mixture-3x2, mnist, cifar10)");
}

}  // namespace condgan
