#include <doctest.h>

#include <cmath>

#include "condgan/conditioning.hpp"
#include "condgan/errors.hpp"
#include "oracles.hpp"

using namespace condgan;
using condgan::testing::check_gradients;
using condgan::testing::random_tensor;
using condgan::testing::weighted_sum;

TEST_CASE("vector_concat examples") {
  const Tensor out = vector_concat(Tensor::vector({1, 2}), ConditionVector(Tensor::vector({0, 1})));
  CHECK(out == Tensor::vector({1, 2, 0, 1}));
  CHECK_THROWS_AS(ConditionVector(Tensor::vector(std::vector<double>{})), DimensionError);
  CHECK_THROWS_AS(ConditionVector(Tensor({2, 2})), DimensionError);

  const Var z = Var::leaf(Tensor::vector({3, 4, 5}), true);
  backward(sum(vector_concat(z, Var::constant(Tensor::vector({1, 0})))));
  CHECK(*z.grad() == Tensor::filled({3}, 1.0));
}

TEST_CASE("spatial_replicate_concat examples") {
  const auto one = spatial_replicate_concat(SpatialTensor(Tensor({1, 1, 2}, {5, 6})), ConditionVector(Tensor::vector({7})));
  CHECK(one.values() == Tensor({1, 1, 3}, {5, 6, 7}));

  Rng rng(1);
  const SpatialTensor x(random_tensor({2, 2, 3}, rng));
  const auto out = spatial_replicate_concat(x, ConditionVector::one_hot(0, 2));
  CHECK(out.channels() == 5);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t k = 0; k < 3; ++k) CHECK(out.at(i, j, k) == x.at(i, j, k));
      CHECK(out.at(i, j, 3) == 1.0);
      CHECK(out.at(i, j, 4) == 0.0);
    }
}

TEST_CASE("replicate-concat gradient wrt c is n squared per entry") {
  for (std::size_t n : {1, 2, 3, 5}) {
    const Var x = Var::constant(Tensor::filled({n, n, 2}, 0.5));
    const Var c = Var::leaf(Tensor::vector({0.2, -0.4, 1.0}), true);
    backward(sum(spatial_replicate_concat(x, c)));
    CHECK(*c.grad() == Tensor::filled({3}, static_cast<double>(n * n)));
  }
}

TEST_CASE("spatial_bilinear_pool examples") {
  const SpatialTensor x(Tensor({1, 1, 2}, {2, 3}));
  CHECK(spatial_bilinear_pool(x, ConditionVector::one_hot(0, 2)).values() == Tensor({1, 1, 4}, {2, 3, 0, 0}));
  CHECK(spatial_bilinear_pool(x, ConditionVector(Tensor::vector({1, 2}))).values() == Tensor({1, 1, 4}, {2, 3, 4, 6}));
  Rng rng(2);
  CHECK(spatial_bilinear_pool(SpatialTensor(random_tensor({4, 4, 3}, rng)), ConditionVector::one_hot(3, 10))
            .values()
            .shape() == Shape{4, 4, 30});
}

TEST_CASE("SBP one-hot selection is exact") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(4), d = 1 + rng.below(4), m = 1 + rng.below(5), a = rng.below(m);
    const SpatialTensor x(random_tensor({n, n, d}, rng));
    const auto out = spatial_bilinear_pool(x, ConditionVector::one_hot(a, m));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t blk = 0; blk < m; ++blk)
          for (std::size_t b = 0; b < d; ++b) CHECK(out.at(i, j, blk * d + b) == (blk == a ? x.at(i, j, b) : 0.0));
  }
}

TEST_CASE("SBP is bilinear") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(3), d = 1 + rng.below(4), m = 1 + rng.below(4);
    const Tensor x1 = random_tensor({n, n, d}, rng), x2 = random_tensor({n, n, d}, rng);
    const Tensor c1 = random_tensor({m}, rng), c2 = random_tensor({m}, rng);
    const double alpha = rng.uniform(-2, 2), beta = rng.uniform(-2, 2);
    auto sbp = [](const Tensor& x, const Tensor& c) {
      return spatial_bilinear_pool(SpatialTensor(x), ConditionVector(c)).values();
    };
    Tensor cmix(c1.shape()), xmix(x1.shape());
    for (std::size_t k = 0; k < m; ++k) cmix[k] = alpha * c1[k] + beta * c2[k];
    for (std::size_t k = 0; k < x1.size(); ++k) xmix[k] = alpha * x1[k] + beta * x2[k];
    const Tensor lhs_c = sbp(x1, cmix), a1 = sbp(x1, c1), a2 = sbp(x1, c2);
    const Tensor lhs_x = sbp(xmix, c1), b1 = sbp(x1, c1), b2 = sbp(x2, c1);
    for (std::size_t k = 0; k < lhs_c.size(); ++k) {
      CHECK(std::abs(lhs_c[k] - (alpha * a1[k] + beta * a2[k])) < 1e-12);
      CHECK(std::abs(lhs_x[k] - (alpha * b1[k] + beta * b2[k])) < 1e-12);
    }
  }
}

TEST_CASE("SBP per-pixel norm equals product of norms") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(3), d = 1 + rng.below(5), m = 1 + rng.below(5);
    const SpatialTensor x(random_tensor({n, n, d}, rng, -3, 3));
    const ConditionVector c(random_tensor({m}, rng, -3, 3));
    const auto out = spatial_bilinear_pool(x, c);
    double cn = 0;
    for (double v : c.values().data()) cn += v * v;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double xn = 0, on = 0;
        for (std::size_t b = 0; b < d; ++b) xn += x.at(i, j, b) * x.at(i, j, b);
        for (std::size_t k = 0; k < d * m; ++k) on += out.at(i, j, k) * out.at(i, j, k);
        CHECK(std::abs(std::sqrt(on) - std::sqrt(xn) * std::sqrt(cn)) < 1e-10);
      }
  }
}

TEST_CASE("replicate-concat slices recover x and c") {
  Rng rng(6);
  const SpatialTensor x(random_tensor({3, 3, 2}, rng));
  const ConditionVector c(random_tensor({4}, rng));
  const auto out = spatial_replicate_concat(x, c);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t k = 0; k < 2; ++k) CHECK(out.at(i, j, k) == x.at(i, j, k));
      for (std::size_t k = 0; k < 4; ++k) CHECK(out.at(i, j, 2 + k) == c.values()[k]);
    }
}

TEST_CASE("batched forms match per-sample forms") {
  Rng rng(7);
  const Tensor xb = random_tensor({3, 2, 2, 2}, rng), cb = random_tensor({3, 4}, rng);
  const Tensor sbp = spatial_bilinear_pool(Var::constant(xb), Var::constant(cb)).value();
  const Tensor rep = spatial_replicate_concat(Var::constant(xb), Var::constant(cb)).value();
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(sbp.row(s) == spatial_bilinear_pool(SpatialTensor(xb.row(s)), ConditionVector(cb.row(s))).values());
    CHECK(rep.row(s) == spatial_replicate_concat(SpatialTensor(xb.row(s)), ConditionVector(cb.row(s))).values());
  }
  CHECK_THROWS_AS(spatial_bilinear_pool(Var::constant(xb), Var::constant(random_tensor({2, 4}, rng))), DimensionError);
}

TEST_CASE("conditioning gradients match finite differences") {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor z = random_tensor({2, 3}, rng), c = random_tensor({2, 4}, rng);
    const Tensor x = random_tensor({2, 2, 2, 3}, rng);
    const Tensor x1 = random_tensor({3, 3, 2}, rng), c1 = random_tensor({3}, rng);
    CHECK(check_gradients([](const auto& v) { return weighted_sum(vector_concat(v[0], v[1]), 1); }, {z, c}).ok);
    CHECK(check_gradients([](const auto& v) { return weighted_sum(spatial_replicate_concat(v[0], v[1]), 2); }, {x, c}).ok);
    CHECK(check_gradients([](const auto& v) { return weighted_sum(spatial_bilinear_pool(v[0], v[1]), 3); }, {x, c}).ok);
    CHECK(check_gradients([](const auto& v) { return weighted_sum(spatial_bilinear_pool(v[0], v[1]), 4); }, {x1, c1}).ok);
  }
}
