#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "condgan/checkpoint.hpp"
#include "condgan/data.hpp"
#include "condgan/errors.hpp"
#include "oracles.hpp"

using namespace condgan;

namespace {

IdxImages small_images(std::uint32_t count, std::uint32_t rows, std::uint32_t cols, Rng& rng) {
  IdxImages im{count, rows, cols, std::vector<std::uint8_t>(std::size_t{count} * rows * cols)};
  for (auto& p : im.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  return im;
}

std::vector<std::uint8_t> cifar_bytes(std::size_t records, Rng& rng) {
  std::vector<std::uint8_t> bytes(records * kCifarRecordBytes);
  for (std::size_t r = 0; r < records; ++r) {
    bytes[r * kCifarRecordBytes] = static_cast<std::uint8_t>(rng.below(10));
    for (std::size_t k = 1; k < kCifarRecordBytes; ++k) bytes[r * kCifarRecordBytes + k] = static_cast<std::uint8_t>(rng.below(256));
  }
  return bytes;
}

template <typename Fn>
bool rejects_with_message(Fn&& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return std::string(e.what()).size() > 10;
  }
  return false;
}

}  // namespace

TEST_CASE("official MNIST header parses to 60000 28x28 images") {
  IdxImages im{60000, 28, 28, std::vector<std::uint8_t>(60000u * 784u, 0)};
  const auto bytes = encode_idx_images(im);
  const std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + 8);
  CHECK(head == std::vector<std::uint8_t>{0x00, 0x00, 0x08, 0x03, 0x00, 0x00, 0xEA, 0x60});
  const auto parsed = parse_idx_images(bytes);
  CHECK(parsed.count == 60000);
  CHECK(parsed.rows == 28);
  CHECK(parsed.cols == 28);
}

TEST_CASE("label file with the image magic names the expected magic") {
  std::vector<std::uint8_t> bytes = encode_idx_labels(std::vector<std::uint8_t>{1, 2, 3});
  bytes[3] = 0x03;
  try {
    parse_idx_labels(bytes);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("expected 0x00000801") != std::string::npos);
    CHECK(e.offset() == 0);
  }
}

TEST_CASE("pixel scaling endpoints and exact inversion") {
  CHECK(scale_pixel(255) == 1.0);
  CHECK(scale_pixel(0) == -1.0);
  for (int b = 0; b < 256; ++b) {
    const double x = scale_pixel(static_cast<std::uint8_t>(b));
    CHECK(std::lround((x + 1) * 127.5) == b);
    CHECK(unscale_pixel(x) == b);
  }
}

TEST_CASE("IDX round trip and load_idx") {
  Rng rng(1);
  const IdxImages im = small_images(5, 3, 4, rng);
  const auto parsed = parse_idx_images(encode_idx_images(im));
  CHECK(parsed.pixels == im.pixels);
  const std::vector<std::uint8_t> labels{0, 3, 1, 2, 3};
  CHECK(parse_idx_labels(encode_idx_labels(labels)) == labels);

  const auto dir = testing::scratch_dir("idx");
  const auto bi = encode_idx_images(im), bl = encode_idx_labels(labels);
  write_file_bytes(dir / "img", {bi.begin(), bi.end()});
  write_file_bytes(dir / "lab", {bl.begin(), bl.end()});
  const auto data = load_idx(dir / "img", dir / "lab", 4);
  CHECK(data.count() == 5);
  CHECK(data.image_shape() == ImageShape{3, 4, 1});
  CHECK(data.label_indices() == std::vector<std::size_t>{0, 3, 1, 2, 3});
  CHECK(data.images[0] == scale_pixel(im.pixels[0]));
  CHECK(data.meta.source_checksum.size() == 64);

  const auto short_labels = encode_idx_labels(std::vector<std::uint8_t>{0, 1});
  write_file_bytes(dir / "lab2", {short_labels.begin(), short_labels.end()});
  try {
    load_idx(dir / "img", dir / "lab2", 4);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(load_idx(dir / "img", dir / "lab", 3), ParseError);
  try {
    load_idx(dir / "missing", dir / "lab");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
}

TEST_CASE("IDX mutated headers are all rejected") {
  Rng rng(2);
  const IdxImages im = small_images(4, 5, 6, rng);
  const auto good_images = encode_idx_images(im);
  const auto good_labels = encode_idx_labels(std::vector<std::uint8_t>{1, 2, 3, 4});
  for (int trial = 0; trial < 100; ++trial) {
    const bool images = trial % 2 == 0;
    auto bytes = images ? good_images : good_labels;
    const std::size_t header = images ? 16 : 8;
    switch (rng.below(4)) {
      case 0: {  // magic
        const std::size_t k = rng.below(4);
        bytes[k] = static_cast<std::uint8_t>(bytes[k] ^ (1 + rng.below(255)));
        break;
      }
      case 1: {  // dimension field
        const std::size_t k = 4 + rng.below(header - 4);
        bytes[k] = static_cast<std::uint8_t>(bytes[k] ^ (1 + rng.below(255)));
        break;
      }
      case 2:
        bytes.resize(rng.below(bytes.size()));
        break;
      default:
        bytes.resize(bytes.size() + 1 + rng.below(50), 0);
        break;
    }
    CAPTURE(trial);
    if (images) {
      CHECK(rejects_with_message([&] { parse_idx_images(bytes); }));
    } else {
      CHECK(rejects_with_message([&] { parse_idx_labels(bytes); }));
    }
  }
}

TEST_CASE("CIFAR-10 record parsing and round trip") {
  Rng rng(3);
  auto bytes = cifar_bytes(3, rng);
  bytes[0] = 6;
  const auto data = parse_cifar10_binary(bytes, "test");
  CHECK(data.count() == 3);
  CHECK(data.image_shape() == ImageShape{32, 32, 3});
  CHECK(data.label_of(0) == 6);
  CHECK(std::string(kCifarLabelNames[6]) == "frog");
  CHECK(data.meta.label_names[6] == "frog");
  // Channel-planar source: red plane first, then green, then blue.
  CHECK(data.images.at({0, 0, 1, 0}) == scale_pixel(bytes[1 + 1]));
  CHECK(data.images.at({0, 0, 1, 1}) == scale_pixel(bytes[1 + kCifarPlane + 1]));
  CHECK(data.images.at({0, 2, 0, 2}) == scale_pixel(bytes[1 + 2 * kCifarPlane + 2 * 32]));
  for (std::size_t r = 0; r < 3; ++r) {
    const auto rec = encode_cifar10_record(data, r);
    CHECK(std::equal(rec.begin(), rec.end(), bytes.begin() + static_cast<std::ptrdiff_t>(r * kCifarRecordBytes)));
  }
}

TEST_CASE("CIFAR-10 truncation names the record size") {
  Rng rng(4);
  auto bytes = cifar_bytes(2, rng);
  bytes.pop_back();
  try {
    parse_cifar10_binary(bytes);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("3073") != std::string::npos);
  }
}

TEST_CASE("CIFAR-10 mutated headers are all rejected") {
  Rng rng(5);
  const auto good = cifar_bytes(3, rng);
  for (int trial = 0; trial < 100; ++trial) {
    auto bytes = good;
    switch (rng.below(3)) {
      case 0:
        bytes[rng.below(3) * kCifarRecordBytes] = static_cast<std::uint8_t>(10 + rng.below(246));
        break;
      case 1: {
        std::size_t n = rng.below(bytes.size());
        if (n % kCifarRecordBytes == 0) n += 1;
        bytes.resize(n);
        break;
      }
      default:
        bytes.resize(bytes.size() + 1 + rng.below(kCifarRecordBytes - 1), 0);
        break;
    }
    CAPTURE(trial);
    CHECK(rejects_with_message([&] { parse_cifar10_binary(bytes); }));
  }
  CHECK(rejects_with_message([] { parse_cifar10_binary(std::vector<std::uint8_t>{}); }));
}

TEST_CASE("mixture oracle examples") {
  MixtureSpec single{2, {{{1.0, {0.0, 0.0}, {1.0, 1.0}}}}};
  const MixtureOracle o(single);
  const double x0[2] = {0, 0};
  CHECK(std::abs(o.log_density(x0, 0) + std::log(2 * std::numbers::pi)) < 1e-12);

  MixtureSpec sym{2, {{{0.5, {0.3, -0.2}, {0.04, 0.09}}, {0.5, {-0.3, 0.2}, {0.04, 0.09}}}}};
  const MixtureOracle s(sym);
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const double x[2] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double nx[2] = {-x[0], -x[1]};
    CHECK(std::abs(s.log_density(x, 0) - s.log_density(nx, 0)) < 1e-12);
  }
  MixtureSpec bad{2, {{{0.7, {0, 0}, {1, 1}}}}};
  CHECK_THROWS_AS(bad.validate(), InputError);
  MixtureSpec neg{2, {{{1.0, {0, 0}, {-1, 1}}}}};
  CHECK_THROWS_AS(synth_mixture(neg, 5, 1), InputError);
}

TEST_CASE("oracle mean log density matches the negative entropy") {
  const auto spec = mixture_3x2_spec();
  const MixtureOracle oracle(spec);
  for (std::size_t c = 0; c < spec.condition_count(); ++c) {
    // Negative entropy by midpoint quadrature over a box holding all the mass.
    const std::size_t n = 800;
    const double lo = -1.5, hi = 1.5, h = (hi - lo) / n;
    long double neg_entropy = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double x[2] = {lo + (i + 0.5) * h, lo + (j + 0.5) * h};
        const double lp = oracle.log_density(x, c);
        neg_entropy += std::exp(lp) * lp * h * h;
      }
    Rng rng = Rng(99).split(c);
    const Tensor draws = oracle.sample(c, 100000, rng);
    double sum = 0, sum2 = 0;
    for (std::size_t i = 0; i < draws.dim(0); ++i) {
      const double lp = oracle.log_density(std::span<const double>(draws.data().data() + 2 * i, 2), c);
      sum += lp;
      sum2 += lp * lp;
    }
    const double n_draws = static_cast<double>(draws.dim(0));
    const double mean = sum / n_draws, se = std::sqrt((sum2 / n_draws - mean * mean) / n_draws);
    CAPTURE(c);
    CHECK(std::abs(mean - static_cast<double>(neg_entropy)) < 3 * se);
  }
}

TEST_CASE("synthetic dataset layout") {
  const auto synth = synth_mixture(mixture_3x2_spec(), 10, 4);
  CHECK(synth.dataset.count() == 30);
  CHECK(synth.dataset.image_shape() == ImageShape{1, 1, 2});
  for (std::size_t i = 0; i < 30; ++i) CHECK(synth.dataset.label_of(i) == i % 3);
  for (double v : synth.dataset.images.data()) CHECK(std::abs(v) <= 1.0);
  CHECK(synth_mixture(mixture_3x2_spec(), 10, 4).dataset.images == synth.dataset.images);
}

TEST_CASE("split properties") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 2 + rng.below(4), n = 30 + rng.below(100);
    std::vector<std::size_t> labels(n);
    for (auto& l : labels) l = rng.below(m);
    for (std::size_t c = 0; c < m; ++c) labels[c] = c;  // every label present
    std::vector<std::size_t> counts(m);
    for (auto l : labels) ++counts[l];
    if (*std::min_element(counts.begin(), counts.end()) < 3) continue;
    const LabeledDataset data(Tensor::filled({n, 1, 1, 1}, 0.0), one_hot_rows(labels, m), {"r", "", kTanhScale, {}});
    const SplitFractions f{0.6, 0.25, 0.15};
    const auto s = split_indices(data, f, trial);
    CHECK(split_indices(data, f, trial).train == s.train);
    std::set<std::size_t> all;
    for (const auto* part : {&s.train, &s.valid, &s.test}) all.insert(part->begin(), part->end());
    CHECK(all.size() == n);
    CHECK(s.train.size() + s.valid.size() + s.test.size() == n);
    for (std::size_t c = 0; c < m; ++c) {
      const double fr[3] = {f.train, f.valid, f.test};
      const std::vector<std::size_t>* parts[3] = {&s.train, &s.valid, &s.test};
      for (int p = 0; p < 3; ++p) {
        const auto k = std::count_if(parts[p]->begin(), parts[p]->end(), [&](std::size_t i) { return labels[i] == c; });
        CHECK(std::abs(static_cast<double>(k) - fr[p] * counts[c]) <= 1.0);
      }
    }
  }
}

TEST_CASE("split preconditions") {
  const LabeledDataset data(Tensor::filled({6, 1, 1, 1}, 0.0), one_hot_rows(std::vector<std::size_t>{0, 0, 0, 1, 1, 1}, 2),
                            {"r", "", kTanhScale, {}});
  CHECK_THROWS_AS(split_indices(data, {1.0, 0.0, 0.0}, 1), InputError);
  CHECK_THROWS_AS(split_indices(data, {0.5, 0.3, 0.3}, 1), InputError);
  const LabeledDataset sparse(Tensor::filled({4, 1, 1, 1}, 0.0), one_hot_rows(std::vector<std::size_t>{0, 0, 0, 1}, 2),
                              {"r", "", kTanhScale, {}});
  CHECK_THROWS_AS(split_indices(sparse, {0.5, 0.25, 0.25}, 1), InputError);
}

TEST_CASE("dataset invariants are enforced") {
  CHECK_THROWS_AS(LabeledDataset(Tensor::filled({2, 1, 1, 1}, 1.5), one_hot_rows(std::vector<std::size_t>{0, 1}, 2), {}),
                  InputError);
  CHECK_THROWS_AS(LabeledDataset(Tensor::filled({2, 1, 1, 1}, 0.0), Tensor::filled({2, 2}, 0.5), {}), InputError);
}

TEST_CASE("bundled presets") {
  const auto mnist = load_preset("tiny-mnist-3", CONDGAN_DATA_DIR);
  CHECK(mnist.splits.train.count() == 1500);
  CHECK(mnist.splits.valid.count() == 300);
  CHECK(mnist.splits.test.count() == 300);
  CHECK(mnist.splits.train.image_shape() == ImageShape{8, 8, 1});
  CHECK(mnist.splits.test.meta.label_names == std::vector<std::string>{"0", "1", "2"});
  for (std::size_t c = 0; c < 3; ++c) CHECK(mnist.splits.test.indices_with_label(c).size() == 100);
  CHECK(load_preset("tiny-mnist-3", CONDGAN_DATA_DIR).splits.train.images == mnist.splits.train.images);

  const auto mix = load_preset("mixture-3x2", CONDGAN_DATA_DIR);
  CHECK(mix.oracle != nullptr);
  CHECK(mix.splits.train.count() + mix.splits.valid.count() + mix.splits.test.count() == 3000);
  CHECK(mix.splits.test.count() == 600);

  CHECK_THROWS_AS(load_preset("imagenet", CONDGAN_DATA_DIR), ConfigError);
  CHECK_THROWS_AS(load_preset("tiny-mnist-3", "/nonexistent/dir"), DataError);
  CHECK_THROWS_AS(load_preset("cifar10", "/nonexistent/dir"), DataError);
}

TEST_CASE("average pooling") {
  Tensor img({1, 4, 4, 1});
  for (std::size_t i = 0; i < 16; ++i) img[i] = static_cast<double>(i) / 16.0;
  const LabeledDataset data(img, one_hot_rows(std::vector<std::size_t>{0}, 1), {"p", "", kTanhScale, {}});
  const auto pooled = average_pool(data, 0, 2);
  CHECK(pooled.image_shape() == ImageShape{2, 2, 1});
  CHECK(pooled.images[0] == doctest::Approx((0 + 1 + 4 + 5) / 64.0));
  const auto cropped = average_pool(data, 1, 2);
  CHECK(cropped.image_shape() == ImageShape{1, 1, 1});
  CHECK(cropped.images[0] == doctest::Approx((5 + 6 + 9 + 10) / 64.0));
}
