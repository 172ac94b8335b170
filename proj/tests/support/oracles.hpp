#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "condgan/autodiff.hpp"
#include "condgan/ops.hpp"
#include "condgan/rng.hpp"
#include "condgan/tensor.hpp"

namespace condgan::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

inline Tensor random_one_hot_rows(std::size_t rows, std::size_t m, Rng& rng) {
  Tensor t({rows, m});
  for (std::size_t r = 0; r < rows; ++r) t[r * m + rng.below(m)] = 1.0;
  return t;
}

struct GradCheck {
  bool ok = true;
  double worst_excess = 0.0;  // max of |a - n| - (atol + rtol |n|)
  std::string detail;
};

// Builds a scalar from graph inputs.
using ScalarFn = std::function<Var(const std::vector<Var>&)>;

// Compares backward() against central differences of f at `inputs`.
inline GradCheck check_gradients(const ScalarFn& f, const std::vector<Tensor>& inputs, double rtol = 1e-4,
                                 double atol = 1e-6, double h = 1e-5) {
  std::vector<Var> leaves;
  for (const auto& t : inputs) leaves.push_back(Var::leaf(t, true));
  const Var loss = f(leaves);
  backward(loss);

  GradCheck result;
  result.worst_excess = -INFINITY;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& g = leaves[i].grad();
    for (std::size_t k = 0; k < inputs[i].size(); ++k) {
      auto eval = [&](double delta) {
        std::vector<Var> shifted;
        for (std::size_t j = 0; j < inputs.size(); ++j) {
          Tensor t = inputs[j];
          if (j == i) t[k] += delta;
          shifted.push_back(Var::constant(std::move(t)));
        }
        return f(shifted).value().item();
      };
      const double numeric = (eval(h) - eval(-h)) / (2 * h);
      const double analytic = g ? (*g)[k] : 0.0;
      const double excess = std::abs(analytic - numeric) - (atol + rtol * std::abs(numeric));
      if (excess > result.worst_excess) result.worst_excess = excess;
      if (excess > 0 && result.ok) {
        result.ok = false;
        result.detail = "input " + std::to_string(i) + " element " + std::to_string(k) +
                        ": analytic " + std::to_string(analytic) + " numeric " + std::to_string(numeric);
      }
    }
  }
  return result;
}

// sum(op(x) * w) for a fixed random weighting w, so every output element
// contributes a distinct coefficient.
inline Var weighted_sum(const Var& y, std::uint64_t seed) {
  Rng rng(seed);
  return sum(mul(y, Var::constant(random_tensor(y.shape(), rng))));
}

// Parzen log-likelihood by direct density summation in long double.
inline long double parzen_direct(const Tensor& samples, const Tensor& queries, std::size_t q, double sigma) {
  const std::size_t n = samples.dim(0), d = samples.dim(1);
  const long double s2 = static_cast<long double>(sigma) * sigma;
  const long double norm = std::pow(2.0L * 3.14159265358979323846264338327950288L * s2, -0.5L * d);
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double dist = 0.0L;
    for (std::size_t k = 0; k < d; ++k) {
      const long double diff = static_cast<long double>(queries[q * d + k]) - samples[i * d + k];
      dist += diff * diff;
    }
    total += norm * std::exp(-dist / (2.0L * s2));
  }
  return std::log(total / n);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("condgan_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace condgan::testing
