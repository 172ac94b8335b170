#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace condgan {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
/// Product of extents; 1 for the rank-0 shape.
std::size_t element_count(const Shape& shape);

// Dense row-major array of float64 values.
//
// Every extent is positive and size() == element_count(shape()).  A rank-0
// tensor holds a single scalar.
class Tensor {
 public:
  /// Rank-0 zero.
  Tensor();
  /// Zero-filled tensor of the given shape.
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor filled(Shape shape, double value);
  /// Rank-1 tensor; an empty list is rejected.
  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t axis) const;

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

  /// The single element of a one-element tensor.
  double item() const;

  Tensor reshaped(Shape shape) const;
  /// Rows [begin, end) along axis 0.
  Tensor slice_rows(std::size_t begin, std::size_t end) const;
  /// Row i along axis 0, with the leading axis dropped.
  Tensor row(std::size_t i) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
};

/// Throws NumericError naming `op` when t holds a NaN or Inf.
void require_finite(const Tensor& t, std::string_view op);

/// Stacks equally shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor> items);

/// Plain (non-differentiable) matrix product of two rank-2 tensors.
Tensor matmul_values(const Tensor& a, const Tensor& b);

}  // namespace condgan
