#pragma once

#include <cstdint>

#include "condgan/tensor.hpp"

namespace condgan {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// ConfigError unless 0 <= beta1, beta2 < 1, lr >= 0 and epsilon > 0.
  /// lr == 0 is accepted and freezes the parameter.
  void validate() const;

  friend bool operator==(const AdamHyper&, const AdamHyper&) = default;
};

struct AdamState {
  std::uint64_t step = 0;
  Tensor m;  // first moment
  Tensor v;  // second moment
  AdamHyper hyper;

  static AdamState fresh(const Shape& shape, AdamHyper hyper);
};

/// One bias-corrected Adam update of `param` in place; increments state.step.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state);

}  // namespace condgan
