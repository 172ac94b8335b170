#include "condgan/parzen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <thread>
#include <atomic>

#include "condgan/errors.hpp"

namespace condgan {

std::string to_string(SigmaMode mode) { return mode == SigmaMode::global ? "global" : "per_condition"; }

SigmaMode parse_sigma_mode(std::string_view text) {
  if (text == "per_condition") return SigmaMode::per_condition;
  if (text == "global") return SigmaMode::global;
  throw ConfigError("unknown sigma mode '" + std::string(text) + "' (expected per_condition or global)");
}

std::vector<double> default_sigma_grid() {
  std::vector<double> grid(20);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = std::pow(10.0, -2.0 + 2.0 * static_cast<double>(i) / 19.0);
  return grid;
}

void ParzenConfig::validate() const {
  if (sigma_grid.empty()) throw ConfigError("sigma grid is empty");
  for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
    if (!(sigma_grid[i] > 0.0) || !std::isfinite(sigma_grid[i])) throw ConfigError("sigma grid values must be positive");
    if (i && !(sigma_grid[i] > sigma_grid[i - 1])) throw ConfigError("sigma grid must be strictly ascending");
  }
  if (samples_per_condition == 0) throw ConfigError("samples_per_condition must be positive");
  if (query_chunk == 0) throw ConfigError("query_chunk must be positive");
}

namespace {

// Sample rows copied into lexicographic order.
std::vector<double> canonical_rows(const Tensor& samples, std::size_t D) {
  const std::size_t n = samples.dim(0);
  const double* base = samples.data().data();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(base + a * D, base + (a + 1) * D, base + b * D, base + (b + 1) * D);
  });
  std::vector<double> out(n * D);
  for (std::size_t i = 0; i < n; ++i) std::copy_n(base + order[i] * D, D, out.data() + i * D);
  return out;
}

std::size_t check_pair(const Tensor& samples, const Tensor& queries) {
  if (samples.rank() != 2 || queries.rank() != 2) {
    throw DimensionError("parzen: samples and queries must be [N, D] and [T, D], got " + to_string(samples.shape()) +
                         " and " + to_string(queries.shape()));
  }
  if (samples.dim(1) != queries.dim(1)) {
    throw DimensionError("parzen: sample dimension " + std::to_string(samples.dim(1)) + " differs from query dimension " +
                         std::to_string(queries.dim(1)));
  }
  return samples.dim(1);
}

// ll[g][t] for every grid bandwidth g and query t.  Queries are split into
// chunks handed to worker threads; each query's result depends only on the
// query itself, so the output is independent of the scheduling.
std::vector<std::vector<double>> grid_log_likelihood(const Tensor& samples, const Tensor& queries,
                                                     const std::vector<double>& grid, std::size_t chunk = 256) {
  const std::size_t D = check_pair(samples, queries);
  for (double s : grid)
    if (!(s > 0.0) || !std::isfinite(s)) throw InputError("parzen: sigma must be positive, got " + std::to_string(s));
  const std::size_t N = samples.dim(0), T = queries.dim(0);
  const std::vector<double> rows = canonical_rows(samples, D);
  const double log_n = std::log(static_cast<double>(N));
  std::vector<std::vector<double>> ll(grid.size(), std::vector<double>(T));

  auto run_chunk = [&](std::size_t begin, std::size_t end) {
    std::vector<double> sqd(N);
    for (std::size_t t = begin; t < end; ++t) {
      const double* q = queries.data().data() + t * D;
      double nearest = INFINITY;
      for (std::size_t i = 0; i < N; ++i) {
        const double* s = rows.data() + i * D;
        double acc = 0.0;
        for (std::size_t k = 0; k < D; ++k) {
          const double diff = q[k] - s[k];
          acc += diff * diff;
        }
        sqd[i] = acc;
        nearest = std::min(nearest, acc);
      }
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const double inv = 1.0 / (2.0 * grid[g] * grid[g]);
        // The largest exponent is -nearest * inv; factor it out.
        double total = 0.0;
        for (std::size_t i = 0; i < N; ++i) total += std::exp(-(sqd[i] - nearest) * inv);
        ll[g][t] = -nearest * inv + std::log(total) - log_n -
                   0.5 * static_cast<double>(D) * std::log(2.0 * std::numbers::pi * grid[g] * grid[g]);
      }
    }
  };

  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (T + chunk - 1) / chunk;
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), chunks);
  if (workers <= 1) {
    run_chunk(0, T);
    return ll;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c * chunk, std::min(T, (c + 1) * chunk));
    });
  }
  for (auto& t : pool) t.join();
  return ll;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

Tensor rows_of(const LabeledDataset& data, const std::vector<std::size_t>& idx) {
  return data.subset(idx).flat_images();
}

}  // namespace

std::vector<double> parzen_log_likelihood(const Tensor& samples, const Tensor& queries, double sigma) {
  check_pair(samples, queries);
  if (!(sigma > 0.0)) throw InputError("parzen: sigma must be positive");
  return grid_log_likelihood(samples, queries, {sigma})[0];
}

SigmaSelection select_sigma(const Tensor& samples, const Tensor& validation, const std::vector<double>& grid,
                            std::size_t query_chunk) {
  if (grid.empty()) throw InputError("select_sigma: empty sigma grid");
  check_pair(samples, validation);
  const auto ll = grid_log_likelihood(samples, validation, grid, query_chunk);
  SigmaSelection out;
  for (const auto& row : ll) out.mean_ll_per_sigma.push_back(mean_of(row));
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (out.mean_ll_per_sigma[g] > out.mean_ll_per_sigma[best]) best = g;
  out.sigma = grid[best];
  out.mean_ll = out.mean_ll_per_sigma[best];
  return out;
}

std::string ParzenReport::to_csv() const {
  auto num = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return std::string(buf);
  };
  std::string out = "condition,sigma,mean_ll,stderr,n_test,n_samples\n";
  for (const auto& r : rows) {
    out += r.label + "," + num(r.sigma) + "," + num(r.mean_ll) + "," + num(r.stderr_ll) + "," + std::to_string(r.n_test) +
           "," + std::to_string(r.n_samples) + "\n";
  }
  return out;
}

ConditionalSampler generator_sampler(const Model& g) {
  return [g](std::size_t condition, std::size_t count, Rng& rng) {
    const std::size_t m = g.config.condition_dim;
    if (condition >= m) throw InputError("condition " + std::to_string(condition) + " out of range");
    std::vector<std::size_t> labels(count, condition);
    const Tensor images = generate(g, sample_noise(g, count, rng), one_hot_rows(labels, m));
    return images.reshaped({count, g.config.image.flat()});
  };
}

ConditionalSampler shuffled_sampler(ConditionalSampler base, std::size_t m) {
  if (m < 2) throw ConfigError("condition shuffling needs at least two conditions");
  return [base = std::move(base), m](std::size_t condition, std::size_t count, Rng& rng) {
    return base((condition + 1) % m, count, rng);
  };
}

ConditionalSampler oracle_sampler(std::shared_ptr<const MixtureOracle> oracle) {
  return [oracle = std::move(oracle)](std::size_t condition, std::size_t count, Rng& rng) {
    return oracle->sample(condition, count, rng);
  };
}

ParzenReport conditional_eval(const ConditionalSampler& sampler, const LabeledDataset& valid, const LabeledDataset& test,
                              const ParzenConfig& config, std::uint64_t seed, std::string model_name) {
  config.validate();
  if (valid.condition_dim() != test.condition_dim() || valid.image_shape() != test.image_shape()) {
    throw DimensionError("validation and test splits disagree on shapes");
  }
  const std::size_t m = test.condition_dim();
  ParzenReport report;
  report.model = std::move(model_name);
  report.scale_convention = test.meta.scale_convention;
  report.sigma_mode = config.sigma_mode;

  struct Pending {
    Tensor samples;
    Tensor test_rows;
    SigmaSelection selection;
    std::size_t n_valid = 0;
  };
  std::vector<std::optional<Pending>> pending(m);
  const Rng base = Rng(seed).split("parzen");
  for (std::size_t c = 0; c < m; ++c) {
    ParzenRow row;
    row.condition = c;
    row.label = test.meta.label_names.at(c);
    const auto valid_idx = valid.indices_with_label(c);
    const auto test_idx = test.indices_with_label(c);
    if (valid_idx.empty() || test_idx.empty()) {
      row.diagnostic = std::string("condition absent from the ") + (test_idx.empty() ? "test" : "validation") + " split";
      report.rows.push_back(row);
      continue;
    }
    Rng rng = base.split(c);
    Tensor samples = sampler(c, config.samples_per_condition, rng);
    if (samples.rank() != 2 || samples.dim(1) != test.image_shape().flat()) {
      throw DimensionError("sampler produced " + to_string(samples.shape()) + ", expected [n, " +
                           std::to_string(test.image_shape().flat()) + "]");
    }
    Pending p{samples, rows_of(test, test_idx), select_sigma(samples, rows_of(valid, valid_idx), config.sigma_grid, config.query_chunk),
              valid_idx.size()};
    row.n_test = test_idx.size();
    row.n_samples = samples.dim(0);
    pending[c] = std::move(p);
    report.rows.push_back(row);
  }

  std::optional<double> global_sigma;
  if (config.sigma_mode == SigmaMode::global) {
    std::vector<double> totals(config.sigma_grid.size(), 0.0);
    std::size_t count = 0;
    for (const auto& p : pending) {
      if (!p) continue;
      for (std::size_t g = 0; g < totals.size(); ++g) totals[g] += p->selection.mean_ll_per_sigma[g] * p->n_valid;
      count += p->n_valid;
    }
    if (count > 0) {
      std::size_t best = 0;
      for (std::size_t g = 1; g < totals.size(); ++g)
        if (totals[g] > totals[best]) best = g;
      global_sigma = config.sigma_grid[best];
    }
  }

  for (auto& row : report.rows) {
    const auto& p = pending[row.condition];
    if (!p) continue;
    const double sigma = global_sigma ? *global_sigma : p->selection.sigma;
    const auto ll = parzen_log_likelihood(p->samples, p->test_rows, sigma);
    const double mu = mean_of(ll);
    double var = 0.0;
    for (double v : ll) var += (v - mu) * (v - mu);
    const double n = static_cast<double>(ll.size());
    row.sigma = sigma;
    row.mean_ll = mu;
    row.stderr_ll = ll.size() > 1 ? std::sqrt(var / (n - 1.0)) / std::sqrt(n) : 0.0;
  }
  return report;
}

std::string format_table(const std::vector<ParzenReport>& reports, const std::vector<std::string>& label_names,
                         const std::string& title) {
  std::vector<std::vector<std::string>> cells;
  std::size_t model_width = 5;  // "Model"
  for (const auto& r : reports) {
    model_width = std::max(model_width, r.model.size());
    std::vector<std::string> line;
    for (std::size_t c = 0; c < label_names.size(); ++c) {
      std::string text = "n/a";
      for (const auto& row : r.rows) {
        if (row.condition == c && row.mean_ll) {
          char buf[40];
          std::snprintf(buf, sizeof buf, "%.1f", *row.mean_ll);
          text = buf;
        }
      }
      line.push_back(text);
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < label_names.size(); ++c) {
    std::size_t w = std::max<std::size_t>(label_names[c].size(), 6);
    for (const auto& line : cells) w = std::max(w, line[c].size());
    widths.push_back(w);
  }
  auto pad_left = [](const std::string& s, std::size_t w) { return std::string(w - s.size(), ' ') + s; };
  auto pad_right = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };

  std::string out = title + "\n\n";
  out += pad_right("", model_width) + " | Label\n";
  out += pad_right("Model", model_width) + " |";
  for (std::size_t c = 0; c < label_names.size(); ++c) out += " " + pad_left(label_names[c], widths[c]) + (c + 1 < label_names.size() ? " |" : "");
  out += "\n" + std::string(model_width + 1, '-') + "+";
  for (std::size_t c = 0; c < label_names.size(); ++c) out += std::string(widths[c] + 2, '-') + (c + 1 < label_names.size() ? "+" : "");
  out += "\n";
  for (std::size_t r = 0; r < reports.size(); ++r) {
    out += pad_right(reports[r].model, model_width) + " |";
    for (std::size_t c = 0; c < label_names.size(); ++c) out += " " + pad_left(cells[r][c], widths[c]) + (c + 1 < label_names.size() ? " |" : "");
    out += "\n";
  }
  return out;
}

}  // namespace condgan
