#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "condgan/data.hpp"
#include "condgan/models.hpp"
#include "condgan/rng.hpp"
#include "condgan/tensor.hpp"

namespace condgan {

enum class SigmaMode { per_condition, global };

std::string to_string(SigmaMode mode);
SigmaMode parse_sigma_mode(std::string_view text);

/// 20 log-spaced values from 0.01 to 1.
std::vector<double> default_sigma_grid();

struct ParzenConfig {
  std::vector<double> sigma_grid = default_sigma_grid();
  std::size_t samples_per_condition = 2000;
  /// Queries processed per chunk when sweeping the grid.
  std::size_t query_chunk = 256;
  SigmaMode sigma_mode = SigmaMode::per_condition;

  /// ConfigError unless the grid is non-empty, positive and strictly ascending.
  void validate() const;
};

/// Per-query log density of a Gaussian Parzen window with bandwidth sigma
/// centred on each sample row:
///   logsumexp_i(-|q - s_i|^2 / (2 sigma^2)) - log N - (D/2) log(2 pi sigma^2).
/// Samples are reduced in lexicographic row order, so the result does not
/// depend on the order in which samples are supplied.
std::vector<double> parzen_log_likelihood(const Tensor& samples, const Tensor& queries, double sigma);

struct SigmaSelection {
  double sigma = 0.0;
  double mean_ll = 0.0;
  std::vector<double> mean_ll_per_sigma;  // aligned with the grid
};

/// Grid point maximizing mean validation log-likelihood; ties go to the
/// smaller sigma.
SigmaSelection select_sigma(const Tensor& samples, const Tensor& validation, const std::vector<double>& grid,
                            std::size_t query_chunk = 256);

struct ParzenRow {
  std::size_t condition = 0;
  std::string label;
  std::optional<double> sigma;
  std::optional<double> mean_ll;
  std::optional<double> stderr_ll;
  std::size_t n_test = 0;
  std::size_t n_samples = 0;
  std::string diagnostic;  // non-empty for missing rows

  friend bool operator==(const ParzenRow&, const ParzenRow&) = default;
};

struct ParzenReport {
  std::string model;
  std::string scale_convention;
  SigmaMode sigma_mode = SigmaMode::per_condition;
  std::vector<ParzenRow> rows;

  /// Columns condition,sigma,mean_ll,stderr,n_test,n_samples; missing values empty.
  std::string to_csv() const;

  friend bool operator==(const ParzenReport&, const ParzenReport&) = default;
};

/// Draws `count` flattened samples [count, D] for one condition.
using ConditionalSampler = std::function<Tensor(std::size_t condition, std::size_t count, Rng& rng)>;

ConditionalSampler generator_sampler(const Model& g);
/// Samples condition c from `base` at condition (c + 1) mod m.
ConditionalSampler shuffled_sampler(ConditionalSampler base, std::size_t m);
ConditionalSampler oracle_sampler(std::shared_ptr<const MixtureOracle> oracle);

/// Fits a Parzen window per condition to samples from `sampler`, picks sigma
/// on the validation rows of that condition (or jointly in global mode) and
/// reports the mean test log-likelihood with its standard error.
ParzenReport conditional_eval(const ConditionalSampler& sampler, const LabeledDataset& valid, const LabeledDataset& test,
                              const ParzenConfig& config, std::uint64_t seed, std::string model_name = "model");

/// Aligned text table: one column per condition label, one row per report.
std::string format_table(const std::vector<ParzenReport>& reports, const std::vector<std::string>& label_names,
                         const std::string& title);

}  // namespace condgan
