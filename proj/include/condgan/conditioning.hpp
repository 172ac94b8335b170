#pragma once

#include <cstddef>

#include "condgan/autodiff.hpp"
#include "condgan/tensor.hpp"

namespace condgan {

// Length-m condition vector c (m >= 1).  The bundled datasets always use
// one-hot labels, but nothing here requires it.
class ConditionVector {
 public:
  explicit ConditionVector(Tensor values);

  static ConditionVector one_hot(std::size_t index, std::size_t m);

  const Tensor& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool is_one_hot() const noexcept;

 private:
  Tensor values_;
};

// Image tensor of shape [height, width, channels] (channels last).
class SpatialTensor {
 public:
  explicit SpatialTensor(Tensor values);

  const Tensor& values() const noexcept { return values_; }
  std::size_t height() const noexcept { return values_.shape()[0]; }
  std::size_t width() const noexcept { return values_.shape()[1]; }
  std::size_t channels() const noexcept { return values_.shape()[2]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const { return values_.at({i, j, k}); }

 private:
  Tensor values_;
};

// Differentiable forms.  Each accepts either a single sample (z or x without
// a batch axis, c of shape [m]) or a batch (leading axis b on both operands).

/// [z, c]: z's entries followed by c's.
Var vector_concat(const Var& z, const Var& c);

/// Appends c to the channels of every pixel: [.., n, n, d] -> [.., n, n, d + m].
Var spatial_replicate_concat(const Var& x, const Var& c);

/// Per-pixel outer product with c: [.., n, n, d] -> [.., n, n, d * m], with
/// output channel a * d + b holding x[.., b] * c[a] (condition-major blocks).
Var spatial_bilinear_pool(const Var& x, const Var& c);

Tensor vector_concat(const Tensor& z, const ConditionVector& c);
SpatialTensor spatial_replicate_concat(const SpatialTensor& x, const ConditionVector& c);
SpatialTensor spatial_bilinear_pool(const SpatialTensor& x, const ConditionVector& c);

}  // namespace condgan
