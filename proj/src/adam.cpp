#include "condgan/adam.hpp"

#include <cmath>

#include "condgan/errors.hpp"

namespace condgan {

void AdamHyper::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("adam: lr must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adam: beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam: beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam: epsilon must be positive");
}

AdamState AdamState::fresh(const Shape& shape, AdamHyper hyper) {
  hyper.validate();
  return AdamState{0, Tensor(shape), Tensor(shape), hyper};
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& state) {
  if (param.shape() != grad.shape() || param.shape() != state.m.shape() || param.shape() != state.v.shape()) {
    throw DimensionError("adam_step: param " + to_string(param.shape()) + ", grad " + to_string(grad.shape()) +
                         ", moments " + to_string(state.m.shape()));
  }
  const AdamHyper& h = state.hyper;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);
  auto p = param.data();
  auto g = grad.data();
  auto m = state.m.data();
  auto v = state.v.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    p[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
  require_finite(param, "adam_step");
}

}  // namespace condgan
