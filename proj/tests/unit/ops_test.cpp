#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mvts/error.hpp"
#include "mvts/ops.hpp"

using namespace mvts;

namespace {

Tensor random(Shape shape, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return Tensor::from_data(std::move(shape), std::move(v));
}

}  // namespace

TEST(Ops, MatmulMatchesTripleLoop) {
  Rng rng(1);
  Tensor a = random({3, 5}, rng), b = random({5, 4}, rng);
  Tensor c = matmul(a, b);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 5; ++k) s += a.data()[i * 5 + k] * b.data()[k * 4 + j];
      EXPECT_NEAR(c.data()[i * 4 + j], s, 1e-14);
    }
}

TEST(Ops, Conv1dMatchesDirectSum) {
  Rng rng(2);
  const std::size_t n = 2, cin = 3, t = 10, cout = 4, k = 3, stride = 2, pad = 1;
  Tensor x = random({n, cin, t}, rng), w = random({cout, cin, k}, rng);
  Tensor y = conv1d(x, w, stride, pad);
  const std::size_t t_out = (t + 2 * pad - k) / stride + 1;
  ASSERT_EQ(y.shape(), (Shape{n, cout, t_out}));
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t s = 0; s < t_out; ++s) {
        double acc = 0;
        for (std::size_t c = 0; c < cin; ++c)
          for (std::size_t j = 0; j < k; ++j) {
            const long pos = long(s * stride + j) - long(pad);
            if (pos < 0 || pos >= long(t)) continue;
            acc += w.data()[(o * cin + c) * k + j] * x.data()[(b * cin + c) * t + std::size_t(pos)];
          }
        EXPECT_NEAR(y.data()[(b * cout + o) * t_out + s], acc, 1e-14);
      }
}

TEST(Ops, ConvOutputLengthErrors) {
  EXPECT_EQ(conv_output_length(3000, 3, 3, 1), 1000u);
  EXPECT_THROW(conv_output_length(0, 3, 1, 0), DimensionError);
  EXPECT_THROW(conv_output_length(10, 0, 1, 0), ConfigError);
}

TEST(Ops, GroupNormNormalizesEachGroup) {
  Rng rng(3);
  Tensor x = random({2, 4, 6}, rng);
  Tensor y = group_norm(x, 2, 1e-12);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t g = 0; g < 2; ++g) {
      double mu = 0, sq = 0;
      for (std::size_t i = 0; i < 12; ++i) mu += y.data()[b * 24 + g * 12 + i];
      mu /= 12;
      for (std::size_t i = 0; i < 12; ++i) sq += std::pow(y.data()[b * 24 + g * 12 + i] - mu, 2);
      EXPECT_NEAR(mu, 0.0, 1e-12);
      EXPECT_NEAR(sq / 12, 1.0, 1e-9);
    }
}

TEST(Ops, GroupNormRejectsIndivisibleChannels) {
  Tensor x = Tensor::zeros({1, 5, 3});
  EXPECT_THROW(group_norm(x, 2, 1e-5), ConfigError);
}

TEST(Ops, LogsumexpHandlesLargeAndInfiniteEntries) {
  const double inf = std::numeric_limits<double>::infinity();
  Tensor a = Tensor::from_data({2, 3}, {1000, 1000, -inf, -inf, -inf, -inf});
  Tensor l = logsumexp(a);
  EXPECT_NEAR(l.data()[0], 1000 + std::log(2.0), 1e-12);
  EXPECT_EQ(l.data()[1], -inf);
}

TEST(Ops, SoftmaxRowsSumToOne) {
  Rng rng(4);
  Tensor s = softmax(scale(random({5, 7}, rng), 30.0));
  for (std::size_t i = 0; i < 5; ++i) {
    double total = 0;
    for (std::size_t j = 0; j < 7; ++j) total += s.data()[i * 7 + j];
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Ops, GeluMatchesClosedForm) {
  Tensor x = Tensor::from_data({3}, {-1.0, 0.0, 2.0});
  Tensor y = gelu(x);
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = x.data()[i];
    EXPECT_NEAR(y.data()[i], 0.5 * v * (1 + std::erf(v / std::sqrt(2.0))), 1e-15);
  }
}

TEST(Ops, ClampMaxCountsClampedEntries) {
  std::size_t clamped = 0;
  Tensor y = clamp_max(Tensor::from_data({4}, {0, 60, 51, 49}), 50, &clamped);
  EXPECT_EQ(clamped, 2u);
  EXPECT_EQ(y.data()[1], 50.0);
  EXPECT_EQ(y.data()[3], 49.0);
}

TEST(Ops, MaxpoolFloorsAndFallsBackOnShortInput) {
  Tensor x = Tensor::from_data({1, 1, 5}, {1, 3, 2, 5, 4});
  Tensor y = maxpool1d(x, 2, 2);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 2}));
  EXPECT_EQ(y.data()[0], 3.0);
  EXPECT_EQ(y.data()[1], 5.0);
  Tensor single = maxpool1d(Tensor::from_data({1, 1, 1}, {7}), 2, 2);
  EXPECT_EQ(single.shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(single.data()[0], 7.0);
}

TEST(Ops, AdaptiveBoundsUseFloor) {
  EXPECT_EQ(adaptive_pool_bounds(33, 4), (std::vector<std::size_t>{0, 8, 16, 24, 33}));
  EXPECT_EQ(adaptive_pool_bounds(4, 4), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_THROW(adaptive_pool_bounds(3, 4), ConfigError);
}

TEST(Ops, DropoutIsIdentityInEval) {
  Tensor x = Tensor::full({10}, 2.0);
  EXPECT_EQ(dropout(x, 0.5, false, nullptr).node(), x.node());
}

TEST(Ops, DropoutKeepsExpectation) {
  Rng rng(5);
  Tensor y = dropout(Tensor::full({200000}, 1.0), 0.1, true, &rng);
  double total = 0;
  std::size_t zeros = 0;
  for (double v : y.data()) {
    total += v;
    zeros += v == 0.0;
    if (v != 0.0) EXPECT_NEAR(v, 1.0 / 0.9, 1e-15);
  }
  EXPECT_NEAR(total / 200000, 1.0, 0.01);
  EXPECT_NEAR(double(zeros) / 200000, 0.1, 0.005);
}

TEST(Ops, ScaledCosineMatchesDefinition) {
  Rng rng(6);
  Tensor a = random({2, 3}, rng), b = random({3, 3}, rng);
  Tensor s = scaled_cosine_similarity(a, b, 0.5);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t k = 0; k < 3; ++k) {
        dot += a.data()[i * 3 + k] * b.data()[j * 3 + k];
        na += a.data()[i * 3 + k] * a.data()[i * 3 + k];
        nb += b.data()[j * 3 + k] * b.data()[j * 3 + k];
      }
      EXPECT_NEAR(s.data()[i * 3 + j], dot / (0.5 * (std::sqrt(na) + kCosineNormEps) * (std::sqrt(nb) + kCosineNormEps)), 1e-13);
    }
}

TEST(Ops, TransposeSwapsAxes) {
  Tensor x = Tensor::from_data({2, 3}, {0, 1, 2, 3, 4, 5});
  Tensor y = transpose(x, 0, 1);
  EXPECT_EQ(y.shape(), (Shape{3, 2}));
  EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()), (std::vector<double>{0, 3, 1, 4, 2, 5}));
}

TEST(Ops, CrossEntropyOfUniformLogitsIsLogK) {
  const std::size_t labels[] = {0, 1, 2};
  EXPECT_NEAR(cross_entropy(Tensor::zeros({3, 4}), labels).item(), std::log(4.0), 1e-15);
}

TEST(Ops, BinaryOpsRejectShapeMismatch) {
  EXPECT_THROW(add(Tensor::zeros({2}), Tensor::zeros({3})), DimensionError);
  EXPECT_THROW(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), DimensionError);
}
