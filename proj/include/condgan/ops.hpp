#pragma once

#include <string>
#include <string_view>

#include "condgan/autodiff.hpp"
#include "condgan/tensor.hpp"

namespace condgan {

struct Activation {
  enum class Kind { identity, relu, leaky_relu, sigmoid, tanh };

  Kind kind = Kind::relu;
  double alpha = 0.2;  // leaky_relu slope for negative inputs

  static Activation identity() { return {Kind::identity, 0.0}; }
  static Activation relu() { return {Kind::relu, 0.0}; }
  /// alpha must lie in (0, 1).
  static Activation leaky_relu(double alpha);
  static Activation sigmoid() { return {Kind::sigmoid, 0.0}; }
  static Activation tanh() { return {Kind::tanh, 0.0}; }

  /// Parses "identity", "relu", "sigmoid", "tanh" or "leaky_relu(<alpha>)".
  static Activation parse(std::string_view text);
  std::string name() const;

  friend bool operator==(const Activation&, const Activation&) = default;
};

// Differentiable operations.  Each returns a new graph node; shape errors
// throw DimensionError naming both operands.

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);
/// x[r, s] + b[s] broadcast over rows.
Var add_bias(const Var& x, const Var& bias);
Var activation(const Var& x, Activation kind);
Var sum(const Var& x);
Var mean(const Var& x);
/// Sums over the last axis, dropping it.
Var row_sum(const Var& x);
/// log(max(x, floor)) elementwise.
Var log_clamped(const Var& x, double floor = 1e-12);
/// Softmax over the last axis.
Var softmax_rows(const Var& logits);
/// Mean over rows of -log softmax(logits)[target class], via log-sum-exp.
/// `target` rows must be one-hot; anything else raises InputError.
Var softmax_cross_entropy(const Var& logits, const Tensor& target);
Var reshape(const Var& x, Shape shape);
/// Concatenates along the last axis; leading extents must agree.
Var concat_last(const Var& a, const Var& b);

Tensor apply_activation(const Tensor& x, Activation kind);
Tensor softmax_values(const Tensor& logits);
/// Index of the single 1 in each row of a one-hot matrix; InputError otherwise.
std::vector<std::size_t> one_hot_indices(const Tensor& target);

}  // namespace condgan
