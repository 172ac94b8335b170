#include <cmath>
#include <numbers>
#include <sstream>

#include "condgan/checkpoint.hpp"
#include "condgan/data.hpp"
#include "condgan/errors.hpp"

namespace condgan {

void MixtureSpec::validate() const {
  if (dimension == 0) throw InputError("mixture dimension must be positive");
  if (components.empty()) throw InputError("mixture needs at least one condition");
  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto& comps = components[c];
    if (comps.empty()) throw InputError("condition " + std::to_string(c) + " has no components");
    double total = 0.0;
    for (const auto& k : comps) {
      if (!(k.weight > 0.0)) throw InputError("mixture weights must be positive");
      if (k.mean.size() != dimension || k.variance.size() != dimension) {
        throw InputError("mixture component dimension does not match " + std::to_string(dimension));
      }
      for (double v : k.variance)
        if (!(v > 0.0)) throw InputError("mixture variances must be positive");
      total += k.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("weights of condition " + std::to_string(c) + " do not sum to 1");
  }
}

MixtureOracle::MixtureOracle(MixtureSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

double MixtureOracle::log_density(std::span<const double> x, std::size_t condition) const {
  if (condition >= spec_.condition_count()) throw InputError("condition out of range");
  if (x.size() != spec_.dimension) throw DimensionError("point dimension does not match mixture");
  const auto& comps = spec_.components[condition];
  std::vector<double> terms;
  terms.reserve(comps.size());
  for (const auto& k : comps) {
    double t = std::log(k.weight);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double diff = x[i] - k.mean[i];
      t += -0.5 * diff * diff / k.variance[i] - 0.5 * std::log(2.0 * std::numbers::pi * k.variance[i]);
    }
    terms.push_back(t);
  }
  double peak = terms[0];
  for (double t : terms) peak = std::max(peak, t);
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

Tensor MixtureOracle::sample(std::size_t condition, std::size_t count, Rng& rng) const {
  if (condition >= spec_.condition_count()) throw InputError("condition out of range");
  if (count == 0) throw InputError("sample count must be positive");
  const auto& comps = spec_.components[condition];
  const std::size_t D = spec_.dimension;
  Tensor out({count, D});
  std::vector<double> point(D);
  for (std::size_t s = 0; s < count; ++s) {
    for (;;) {
      double u = rng.uniform();
      std::size_t k = 0;
      while (k + 1 < comps.size() && u >= comps[k].weight) {
        u -= comps[k].weight;
        ++k;
      }
      bool inside = true;
      for (std::size_t i = 0; i < D; ++i) {
        point[i] = comps[k].mean[i] + std::sqrt(comps[k].variance[i]) * rng.normal();
        inside = inside && point[i] >= -1.0 && point[i] <= 1.0;
      }
      if (inside) break;
    }
    std::copy(point.begin(), point.end(), out.data().begin() + static_cast<std::ptrdiff_t>(s * D));
  }
  return out;
}

SyntheticData synth_mixture(const MixtureSpec& spec, std::size_t count_per_condition, std::uint64_t seed) {
  auto oracle = std::make_shared<const MixtureOracle>(spec);
  if (count_per_condition == 0) throw InputError("count_per_condition must be positive");
  const std::size_t m = spec.condition_count(), D = spec.dimension;
  Rng base = Rng(seed).split("mixture");
  std::vector<Tensor> draws;
  for (std::size_t c = 0; c < m; ++c) {
    Rng rng = base.split(c);
    draws.push_back(oracle->sample(c, count_per_condition, rng));
  }
  const std::size_t n = m * count_per_condition;
  Tensor images({n, 1, 1, D});
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < count_per_condition; ++i)
    for (std::size_t c = 0; c < m; ++c) {
      const std::size_t row = i * m + c;
      labels[row] = c;
      for (std::size_t j = 0; j < D; ++j) images[row * D + j] = draws[c][i * D + j];
    }

  std::ostringstream fingerprint;
  fingerprint.precision(17);
  fingerprint << "seed=" << seed << ";count=" << count_per_condition << ";D=" << D;
  for (const auto& comps : spec.components) {
    fingerprint << "|";
    for (const auto& k : comps) {
      fingerprint << "w" << k.weight;
      for (double v : k.mean) fingerprint << ",m" << v;
      for (double v : k.variance) fingerprint << ",v" << v;
    }
  }
  DatasetMetadata meta;
  meta.name = "synthetic-mixture";
  meta.source_checksum = sha256_hex(fingerprint.str());
  meta.scale_convention = "raw mixture coordinates in [-1, 1] (draws outside rejected)";
  return {LabeledDataset(std::move(images), one_hot_rows(labels, m), std::move(meta)), std::move(oracle)};
}

MixtureSpec mixture_3x2_spec() {
  constexpr double radius = 0.45;
  constexpr double offset = 0.12;
  constexpr double variance = 0.07 * 0.07;
  MixtureSpec spec;
  spec.dimension = 2;
  for (int c = 0; c < 3; ++c) {
    const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * c / 3.0;
    const double cx = radius * std::cos(angle), cy = radius * std::sin(angle);
    const double tx = -std::sin(angle), ty = std::cos(angle);
    spec.components.push_back({
        {0.5, {cx + offset * tx, cy + offset * ty}, {variance, variance}},
        {0.5, {cx - offset * tx, cy - offset * ty}, {variance, variance}},
    });
  }
  return spec;
}

}  // namespace condgan
