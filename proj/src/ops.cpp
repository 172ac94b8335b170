#include "condgan/ops.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdlib>

#include "condgan/errors.hpp"

namespace condgan {

namespace {

const Tensor& upstream_of(const GraphNode& self) { return *self.grad; }
const Tensor& parent_value(const GraphNode& self, std::size_t i) { return self.parents[i]->value; }

void require_same_shape(const Tensor& a, const Tensor& b, std::string_view op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) +
                         " differ");
  }
}

Tensor zip(const Tensor& a, const Tensor& b, auto&& fn) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i], b[i]);
  return out;
}

Tensor map(const Tensor& a, auto&& fn) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i]);
  return out;
}

Tensor transpose(const Tensor& m) {
  const std::size_t r = m.dim(0), c = m.dim(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = m[i * c + j];
  return out;
}

double sigmoid_scalar(double x) {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  // Keep the output strictly inside (0, 1).
  return std::clamp(s, DBL_MIN, 1.0 - DBL_EPSILON / 2.0);
}

std::size_t last_extent(const Tensor& t, std::string_view op) {
  if (t.rank() == 0) throw DimensionError(std::string(op) + ": needs rank >= 1, got a scalar");
  return t.shape().back();
}

}  // namespace

Activation Activation::leaky_relu(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("leaky_relu slope must lie in (0, 1), got " + std::to_string(alpha));
  }
  return {Kind::leaky_relu, alpha};
}

Activation Activation::parse(std::string_view text) {
  if (text == "identity") return identity();
  if (text == "relu") return relu();
  if (text == "sigmoid") return sigmoid();
  if (text == "tanh") return tanh();
  constexpr std::string_view leaky = "leaky_relu";
  if (text == leaky) return leaky_relu(0.2);
  if (text.starts_with(leaky) && text.size() > leaky.size() + 2 && text[leaky.size()] == '(' && text.back() == ')') {
    const std::string arg(text.substr(leaky.size() + 1, text.size() - leaky.size() - 2));
    char* end = nullptr;
    const double alpha = std::strtod(arg.c_str(), &end);
    if (end == arg.c_str() || *end != '\0') throw ConfigError("bad leaky_relu slope '" + arg + "'");
    return leaky_relu(alpha);
  }
  throw ConfigError("unknown activation '" + std::string(text) + "'");
}

std::string Activation::name() const {
  switch (kind) {
    case Kind::identity: return "identity";
    case Kind::relu: return "relu";
    case Kind::sigmoid: return "sigmoid";
    case Kind::tanh: return "tanh";
    case Kind::leaky_relu: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "leaky_relu(%.17g)", alpha);
      return buf;
    }
  }
  throw ConfigError("invalid activation kind");
}

Tensor apply_activation(const Tensor& x, Activation kind) {
  switch (kind.kind) {
    case Activation::Kind::identity: return x;
    case Activation::Kind::relu: return map(x, [](double v) { return v > 0.0 ? v : 0.0; });
    case Activation::Kind::leaky_relu: return map(x, [a = kind.alpha](double v) { return v > 0.0 ? v : a * v; });
    case Activation::Kind::sigmoid: return map(x, sigmoid_scalar);
    case Activation::Kind::tanh: return map(x, [](double v) { return std::tanh(v); });
  }
  throw ConfigError("invalid activation kind");
}

Var matmul(const Var& a, const Var& b) {
  Tensor out = matmul_values(a.value(), b.value());
  return Var::make(std::move(out), "matmul", {a, b}, [](const GraphNode& self, auto& grads) {
    const Tensor& g = upstream_of(self);
    grads[0] = matmul_values(g, transpose(parent_value(self, 1)));
    grads[1] = matmul_values(transpose(parent_value(self, 0)), g);
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "add");
  return Var::make(zip(a.value(), b.value(), std::plus<>{}), "add", {a, b}, [](const GraphNode& self, auto& grads) {
    grads[0] = upstream_of(self);
    grads[1] = upstream_of(self);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "sub");
  return Var::make(zip(a.value(), b.value(), std::minus<>{}), "sub", {a, b}, [](const GraphNode& self, auto& grads) {
    grads[0] = upstream_of(self);
    grads[1] = map(upstream_of(self), std::negate<>{});
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "mul");
  return Var::make(zip(a.value(), b.value(), std::multiplies<>{}), "mul", {a, b},
                   [](const GraphNode& self, auto& grads) {
                     grads[0] = zip(upstream_of(self), parent_value(self, 1), std::multiplies<>{});
                     grads[1] = zip(upstream_of(self), parent_value(self, 0), std::multiplies<>{});
                   });
}

Var scale(const Var& a, double factor) {
  return Var::make(map(a.value(), [factor](double v) { return v * factor; }), "scale", {a},
                   [factor](const GraphNode& self, auto& grads) {
                     grads[0] = map(upstream_of(self), [factor](double g) { return g * factor; });
                   });
}

Var add_scalar(const Var& a, double offset) {
  return Var::make(map(a.value(), [offset](double v) { return v + offset; }), "add_scalar", {a},
                   [](const GraphNode& self, auto& grads) { grads[0] = upstream_of(self); });
}

Var add_bias(const Var& x, const Var& bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (xv.rank() != 2 || bv.rank() != 1 || xv.dim(1) != bv.dim(0)) {
    throw DimensionError("add_bias: incompatible shapes " + to_string(xv.shape()) + " and " + to_string(bv.shape()));
  }
  const std::size_t r = xv.dim(0), s = xv.dim(1);
  Tensor out = xv;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < s; ++j) out[i * s + j] += bv[j];
  return Var::make(std::move(out), "add_bias", {x, bias}, [r, s](const GraphNode& self, auto& grads) {
    const Tensor& g = upstream_of(self);
    grads[0] = g;
    Tensor gb({s});
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < s; ++j) gb[j] += g[i * s + j];
    grads[1] = std::move(gb);
  });
}

Var activation(const Var& x, Activation kind) {
  Tensor out = apply_activation(x.value(), kind);
  return Var::make(std::move(out), "activation:" + kind.name(), {x}, [kind](const GraphNode& self, auto& grads) {
    const Tensor& g = upstream_of(self);
    const Tensor& in = parent_value(self, 0);
    const Tensor& y = self.value;
    Tensor d(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) {
      double local = 1.0;
      switch (kind.kind) {
        case Activation::Kind::identity: local = 1.0; break;
        case Activation::Kind::relu: local = in[i] > 0.0 ? 1.0 : 0.0; break;
        case Activation::Kind::leaky_relu: local = in[i] > 0.0 ? 1.0 : kind.alpha; break;
        case Activation::Kind::sigmoid: local = y[i] * (1.0 - y[i]); break;
        case Activation::Kind::tanh: local = 1.0 - y[i] * y[i]; break;
      }
      d[i] = g[i] * local;
    }
    grads[0] = std::move(d);
  });
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return Var::make(Tensor::scalar(total), "sum", {x}, [](const GraphNode& self, auto& grads) {
    grads[0] = Tensor::filled(parent_value(self, 0).shape(), upstream_of(self).item());
  });
}

Var mean(const Var& x) {
  const double n = static_cast<double>(x.value().size());
  return scale(sum(x), 1.0 / n);
}

Var row_sum(const Var& x) {
  const Tensor& xv = x.value();
  const std::size_t m = last_extent(xv, "row_sum");
  const std::size_t rows = xv.size() / m;
  Shape out_shape(xv.shape().begin(), xv.shape().end() - 1);
  Tensor out(out_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) total += xv[r * m + j];
    out[r] = total;
  }
  return Var::make(std::move(out), "row_sum", {x}, [rows, m](const GraphNode& self, auto& grads) {
    const Tensor& g = upstream_of(self);
    Tensor d(parent_value(self, 0).shape());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < m; ++j) d[r * m + j] = g[r];
    grads[0] = std::move(d);
  });
}

Var log_clamped(const Var& x, double floor) {
  if (!(floor > 0.0)) throw ConfigError("log floor must be positive");
  Tensor out = map(x.value(), [floor](double v) { return std::log(std::max(v, floor)); });
  return Var::make(std::move(out), "log", {x}, [floor](const GraphNode& self, auto& grads) {
    grads[0] = zip(upstream_of(self), parent_value(self, 0),
                   [floor](double g, double v) { return v > floor ? g / v : 0.0; });
  });
}

Tensor softmax_values(const Tensor& logits) {
  const std::size_t m = last_extent(logits, "softmax");
  const std::size_t rows = logits.size() / m;
  Tensor out(logits.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = logits.data().data() + r * m;
    double* o = out.data().data() + r * m;
    const double peak = *std::max_element(in, in + m);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      o[j] = std::exp(in[j] - peak);
      total += o[j];
    }
    for (std::size_t j = 0; j < m; ++j) o[j] /= total;
  }
  return out;
}

Var softmax_rows(const Var& logits) {
  const std::size_t m = last_extent(logits.value(), "softmax");
  return Var::make(softmax_values(logits.value()), "softmax", {logits}, [m](const GraphNode& self, auto& grads) {
    const Tensor& g = upstream_of(self);
    const Tensor& s = self.value;
    Tensor d(s.shape());
    for (std::size_t r = 0; r < s.size() / m; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += g[r * m + j] * s[r * m + j];
      for (std::size_t j = 0; j < m; ++j) d[r * m + j] = s[r * m + j] * (g[r * m + j] - dot);
    }
    grads[0] = std::move(d);
  });
}

std::vector<std::size_t> one_hot_indices(const Tensor& target) {
  if (target.rank() != 2) throw DimensionError("one-hot target must be rank 2, got " + to_string(target.shape()));
  const std::size_t b = target.dim(0), m = target.dim(1);
  std::vector<std::size_t> idx(b);
  for (std::size_t r = 0; r < b; ++r) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const double v = target[r * m + j];
      if (v == 1.0) {
        idx[r] = j;
        ++ones;
      } else if (v != 0.0) {
        ones = 2;
        break;
      }
    }
    if (ones != 1) throw InputError("target row " + std::to_string(r) + " is not one-hot");
  }
  return idx;
}

Var softmax_cross_entropy(const Var& logits, const Tensor& target) {
  const Tensor& lv = logits.value();
  if (lv.rank() != 2 || lv.shape() != target.shape()) {
    throw DimensionError("softmax_cross_entropy: logits " + to_string(lv.shape()) + " vs target " +
                         to_string(target.shape()));
  }
  const auto idx = one_hot_indices(target);
  const std::size_t b = lv.dim(0), m = lv.dim(1);
  double total = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    const double* in = lv.data().data() + r * m;
    const double peak = *std::max_element(in, in + m);
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += std::exp(in[j] - peak);
    total += peak + std::log(acc) - in[idx[r]];
  }
  const double loss = total / static_cast<double>(b);
  return Var::make(Tensor::scalar(loss), "softmax_cross_entropy", {logits},
                   [idx, b, m](const GraphNode& self, auto& grads) {
                     const double g = upstream_of(self).item() / static_cast<double>(b);
                     Tensor d = softmax_values(parent_value(self, 0));
                     for (std::size_t r = 0; r < b; ++r) {
                       d[r * m + idx[r]] -= 1.0;
                       for (std::size_t j = 0; j < m; ++j) d[r * m + j] *= g;
                     }
                     grads[0] = std::move(d);
                   });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return Var::make(std::move(out), "reshape", {x}, [](const GraphNode& self, auto& grads) {
    grads[0] = upstream_of(self).reshaped(parent_value(self, 0).shape());
  });
}

Var concat_last(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t ka = last_extent(av, "concat");
  const std::size_t kb = last_extent(bv, "concat");
  if (av.rank() != bv.rank() || !std::equal(av.shape().begin(), av.shape().end() - 1, bv.shape().begin())) {
    throw DimensionError("concat: leading extents of " + to_string(av.shape()) + " and " + to_string(bv.shape()) +
                         " differ");
  }
  const std::size_t rows = av.size() / ka;
  Shape out_shape = av.shape();
  out_shape.back() = ka + kb;
  Tensor out(out_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data().data() + r * ka, ka, out.data().data() + r * (ka + kb));
    std::copy_n(bv.data().data() + r * kb, kb, out.data().data() + r * (ka + kb) + ka);
  }
  return Var::make(std::move(out), "concat", {a, b}, [rows, ka, kb](const GraphNode& self, auto& grads) {
    const Tensor& g = upstream_of(self);
    Tensor ga(parent_value(self, 0).shape());
    Tensor gb(parent_value(self, 1).shape());
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(g.data().data() + r * (ka + kb), ka, ga.data().data() + r * ka);
      std::copy_n(g.data().data() + r * (ka + kb) + ka, kb, gb.data().data() + r * kb);
    }
    grads[0] = std::move(ga);
    grads[1] = std::move(gb);
  });
}

}  // namespace condgan
