#include "condgan/conditioning.hpp"

#include <algorithm>

#include "condgan/errors.hpp"
#include "condgan/ops.hpp"

namespace condgan {

ConditionVector::ConditionVector(Tensor values) : values_(std::move(values)) {
  if (values_.rank() != 1) throw DimensionError("condition vector must be rank 1, got " + to_string(values_.shape()));
  require_finite(values_, "condition vector");
}

ConditionVector ConditionVector::one_hot(std::size_t index, std::size_t m) {
  if (index >= m) throw InputError("one-hot index " + std::to_string(index) + " out of range for m=" + std::to_string(m));
  Tensor t({m});
  t[index] = 1.0;
  return ConditionVector(std::move(t));
}

bool ConditionVector::is_one_hot() const noexcept {
  std::size_t ones = 0;
  for (double v : values_.data()) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      return false;
    }
  }
  return ones == 1;
}

SpatialTensor::SpatialTensor(Tensor values) : values_(std::move(values)) {
  if (values_.rank() != 3) throw DimensionError("spatial tensor must be rank 3 [n, n, d], got " + to_string(values_.shape()));
}

namespace {

struct SpatialLayout {
  std::size_t batch;   // 1 for a single sample
  std::size_t pixels;  // per sample
  std::size_t d;
  std::size_t m;
};

SpatialLayout spatial_layout(const Tensor& x, const Tensor& c, std::string_view op) {
  const bool single = x.rank() == 3 && c.rank() == 1;
  const bool batched = x.rank() == 4 && c.rank() == 2 && x.dim(0) == c.dim(0);
  if (!single && !batched) {
    throw DimensionError(std::string(op) + ": expected x [n, n, d] with c [m], or x [b, n, n, d] with c [b, m]; got " +
                         to_string(x.shape()) + " and " + to_string(c.shape()));
  }
  const std::size_t batch = single ? 1 : x.dim(0);
  const std::size_t d = x.shape().back();
  return {batch, x.size() / (batch * d), d, c.shape().back()};
}

}  // namespace

Var vector_concat(const Var& z, const Var& c) {
  const auto& zs = z.shape();
  const auto& cs = c.shape();
  const bool single = zs.size() == 1 && cs.size() == 1;
  const bool batched = zs.size() == 2 && cs.size() == 2 && zs[0] == cs[0];
  if (!single && !batched) {
    throw DimensionError("vector_concat: expected z [k] with c [m], or z [b, k] with c [b, m]; got " + to_string(zs) +
                         " and " + to_string(cs));
  }
  return concat_last(z, c);
}

Var spatial_replicate_concat(const Var& x, const Var& c) {
  const Tensor& xv = x.value();
  const Tensor& cv = c.value();
  const auto L = spatial_layout(xv, cv, "spatial_replicate_concat");
  Shape out_shape = xv.shape();
  out_shape.back() = L.d + L.m;
  Tensor out(out_shape);
  const std::size_t width = L.d + L.m;
  for (std::size_t s = 0; s < L.batch; ++s) {
    const double* cs = cv.data().data() + s * L.m;
    for (std::size_t p = 0; p < L.pixels; ++p) {
      const std::size_t px = s * L.pixels + p;
      double* o = out.data().data() + px * width;
      std::copy_n(xv.data().data() + px * L.d, L.d, o);
      std::copy_n(cs, L.m, o + L.d);
    }
  }
  return Var::make(std::move(out), "spatial_replicate_concat", {x, c}, [L, width](const GraphNode& self, auto& grads) {
    const Tensor& g = *self.grad;
    Tensor gx(self.parents[0]->value.shape());
    Tensor gc(self.parents[1]->value.shape());
    for (std::size_t s = 0; s < L.batch; ++s) {
      for (std::size_t p = 0; p < L.pixels; ++p) {
        const std::size_t px = s * L.pixels + p;
        const double* gp = g.data().data() + px * width;
        std::copy_n(gp, L.d, gx.data().data() + px * L.d);
        for (std::size_t a = 0; a < L.m; ++a) gc[s * L.m + a] += gp[L.d + a];
      }
    }
    grads[0] = std::move(gx);
    grads[1] = std::move(gc);
  });
}

Var spatial_bilinear_pool(const Var& x, const Var& c) {
  const Tensor& xv = x.value();
  const Tensor& cv = c.value();
  const auto L = spatial_layout(xv, cv, "spatial_bilinear_pool");
  Shape out_shape = xv.shape();
  out_shape.back() = L.d * L.m;
  Tensor out(out_shape);
  const std::size_t width = L.d * L.m;
  for (std::size_t s = 0; s < L.batch; ++s) {
    const double* cs = cv.data().data() + s * L.m;
    for (std::size_t p = 0; p < L.pixels; ++p) {
      const std::size_t px = s * L.pixels + p;
      const double* xp = xv.data().data() + px * L.d;
      double* o = out.data().data() + px * width;
      for (std::size_t a = 0; a < L.m; ++a)
        for (std::size_t b = 0; b < L.d; ++b) o[a * L.d + b] = xp[b] * cs[a];
    }
  }
  return Var::make(std::move(out), "spatial_bilinear_pool", {x, c}, [L, width](const GraphNode& self, auto& grads) {
    const Tensor& g = *self.grad;
    const Tensor& xv = self.parents[0]->value;
    const Tensor& cv = self.parents[1]->value;
    Tensor gx(xv.shape());
    Tensor gc(cv.shape());
    for (std::size_t s = 0; s < L.batch; ++s) {
      const double* cs = cv.data().data() + s * L.m;
      for (std::size_t p = 0; p < L.pixels; ++p) {
        const std::size_t px = s * L.pixels + p;
        const double* xp = xv.data().data() + px * L.d;
        const double* gp = g.data().data() + px * width;
        double* gxp = gx.data().data() + px * L.d;
        for (std::size_t a = 0; a < L.m; ++a) {
          double acc = 0.0;
          for (std::size_t b = 0; b < L.d; ++b) {
            gxp[b] += gp[a * L.d + b] * cs[a];
            acc += gp[a * L.d + b] * xp[b];
          }
          gc[s * L.m + a] += acc;
        }
      }
    }
    grads[0] = std::move(gx);
    grads[1] = std::move(gc);
  });
}

Tensor vector_concat(const Tensor& z, const ConditionVector& c) {
  return vector_concat(Var::constant(z), Var::constant(c.values())).value();
}

SpatialTensor spatial_replicate_concat(const SpatialTensor& x, const ConditionVector& c) {
  return SpatialTensor(spatial_replicate_concat(Var::constant(x.values()), Var::constant(c.values())).value());
}

SpatialTensor spatial_bilinear_pool(const SpatialTensor& x, const ConditionVector& c) {
  return SpatialTensor(spatial_bilinear_pool(Var::constant(x.values()), Var::constant(c.values())).value());
}

}  // namespace condgan
