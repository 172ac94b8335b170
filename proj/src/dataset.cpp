#include <algorithm>
#include <cmath>

#include "condgan/data.hpp"
#include "condgan/errors.hpp"
#include "condgan/ops.hpp"

namespace condgan {

LabeledDataset::LabeledDataset(Tensor images_, Tensor labels_, DatasetMetadata meta_)
    : images(std::move(images_)), labels(std::move(labels_)), meta(std::move(meta_)) {
  if (images.rank() != 4) throw DimensionError("dataset images must be [count, h, w, d], got " + to_string(images.shape()));
  if (labels.rank() != 2 || labels.dim(0) != images.dim(0)) {
    throw DimensionError("dataset labels " + to_string(labels.shape()) + " do not match images " +
                         to_string(images.shape()));
  }
  one_hot_indices(labels);
  for (double v : images.data()) {
    if (!(v >= -1.0 && v <= 1.0)) throw InputError("dataset pixel outside [-1, 1]");
  }
  if (meta.label_names.empty()) {
    for (std::size_t i = 0; i < labels.dim(1); ++i) meta.label_names.push_back(std::to_string(i));
  }
  if (meta.label_names.size() != labels.dim(1)) throw InputError("label name count does not match condition dimension");
}

ImageShape LabeledDataset::image_shape() const { return {images.dim(1), images.dim(2), images.dim(3)}; }

std::size_t LabeledDataset::label_of(std::size_t i) const {
  const std::size_t m = condition_dim();
  for (std::size_t j = 0; j < m; ++j)
    if (labels[i * m + j] == 1.0) return j;
  throw InputError("row " + std::to_string(i) + " has no label");
}

std::vector<std::size_t> LabeledDataset::label_indices() const { return one_hot_indices(labels); }

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw InputError("empty dataset subset");
  const std::size_t stride = images.size() / count();
  const std::size_t m = condition_dim();
  Shape ishape = images.shape();
  ishape[0] = indices.size();
  std::vector<double> img, lab;
  img.reserve(indices.size() * stride);
  lab.reserve(indices.size() * m);
  for (auto i : indices) {
    if (i >= count()) throw InputError("subset index out of range");
    img.insert(img.end(), images.data().begin() + static_cast<std::ptrdiff_t>(i * stride),
               images.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * stride));
    lab.insert(lab.end(), labels.data().begin() + static_cast<std::ptrdiff_t>(i * m),
               labels.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
  }
  return LabeledDataset(Tensor(ishape, std::move(img)), Tensor({indices.size(), m}, std::move(lab)), meta);
}

Tensor LabeledDataset::flat_images() const { return images.reshaped({count(), image_shape().flat()}); }

std::vector<std::size_t> LabeledDataset::indices_with_label(std::size_t condition) const {
  std::vector<std::size_t> out;
  const auto labels_idx = label_indices();
  for (std::size_t i = 0; i < labels_idx.size(); ++i)
    if (labels_idx[i] == condition) out.push_back(i);
  return out;
}

Tensor one_hot_rows(std::span<const std::size_t> labels, std::size_t m) {
  Tensor out({labels.size(), m});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= m) throw InputError("label " + std::to_string(labels[i]) + " out of range for m=" + std::to_string(m));
    out[i * m + labels[i]] = 1.0;
  }
  return out;
}

double scale_pixel(std::uint8_t byte) noexcept { return static_cast<double>(byte) / 127.5 - 1.0; }

std::uint8_t unscale_pixel(double value) noexcept {
  const double v = std::round((value + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

SplitIndices split_indices(const LabeledDataset& data, SplitFractions f, std::uint64_t seed) {
  if (!(f.train > 0.0 && f.valid > 0.0 && f.test > 0.0)) throw InputError("split fractions must all be positive");
  if (std::abs(f.train + f.valid + f.test - 1.0) > 1e-9) throw InputError("split fractions must sum to 1");
  const std::array<double, 3> frac{f.train, f.valid, f.test};
  const auto labels = data.label_indices();
  Rng base = Rng(seed).split("split");
  SplitIndices out;
  std::array<std::vector<std::size_t>*, 3> parts{&out.train, &out.valid, &out.test};
  for (std::size_t c = 0; c < data.condition_dim(); ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) rows.push_back(i);
    if (rows.empty()) continue;
    if (rows.size() < 3) {
      throw InputError("label " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                       " rows, fewer than the 3 split parts");
    }
    Rng rng = base.split(c);
    rng.shuffle(std::span(rows));
    // Largest remainder; every part receives at least one row.
    const double n = static_cast<double>(rows.size());
    std::array<std::size_t, 3> take{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (int p = 0; p < 3; ++p) {
      const double exact = frac[p] * n;
      take[p] = static_cast<std::size_t>(std::floor(exact));
      rem[p] = exact - std::floor(exact);
      assigned += take[p];
    }
    while (assigned < rows.size()) {
      int best = 0;
      for (int p = 1; p < 3; ++p)
        if (rem[p] > rem[best]) best = p;
      ++take[best];
      rem[best] = -1.0;
      ++assigned;
    }
    for (int p = 0; p < 3; ++p) {
      if (take[p] == 0) {
        int donor = 0;
        for (int q = 1; q < 3; ++q)
          if (take[q] > take[donor]) donor = q;
        --take[donor];
        ++take[p];
      }
    }
    std::size_t cursor = 0;
    for (int p = 0; p < 3; ++p) {
      parts[p]->insert(parts[p]->end(), rows.begin() + static_cast<std::ptrdiff_t>(cursor),
                       rows.begin() + static_cast<std::ptrdiff_t>(cursor + take[p]));
      cursor += take[p];
    }
  }
  for (auto* p : parts) std::sort(p->begin(), p->end());
  return out;
}

DatasetSplits split(const LabeledDataset& data, SplitFractions fractions, std::uint64_t seed) {
  const auto idx = split_indices(data, fractions, seed);
  return {data.subset(idx.train), data.subset(idx.valid), data.subset(idx.test)};
}

LabeledDataset average_pool(const LabeledDataset& data, std::size_t crop, std::size_t window) {
  const ImageShape in = data.image_shape();
  if (window == 0 || 2 * crop >= in.height || 2 * crop >= in.width || (in.height - 2 * crop) % window != 0 ||
      (in.width - 2 * crop) % window != 0) {
    throw InputError("average_pool: window does not tile the cropped image");
  }
  const std::size_t oh = (in.height - 2 * crop) / window, ow = (in.width - 2 * crop) / window, d = in.channels;
  Tensor out({data.count(), oh, ow, d});
  const double inv = 1.0 / static_cast<double>(window * window);
  for (std::size_t s = 0; s < data.count(); ++s)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j)
        for (std::size_t k = 0; k < d; ++k) {
          double acc = 0.0;
          for (std::size_t di = 0; di < window; ++di)
            for (std::size_t dj = 0; dj < window; ++dj) {
              const std::size_t y = crop + i * window + di, x = crop + j * window + dj;
              acc += data.images[((s * in.height + y) * in.width + x) * d + k];
            }
          out[((s * oh + i) * ow + j) * d + k] = acc * inv;
        }
  return LabeledDataset(std::move(out), data.labels, data.meta);
}

}  // namespace condgan
