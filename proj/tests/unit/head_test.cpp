#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mvts/error.hpp"
#include "mvts/head.hpp"
#include "mvts/ops.hpp"

using namespace mvts;

namespace {

Tensor random_rep(Shape shape, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return Tensor::from_data(std::move(shape), std::move(v));
}

// Confusion-count balanced accuracy.
double ba_oracle(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& label, std::size_t k) {
  std::vector<double> hit(k, 0), total(k, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    total[label[i]] += 1;
    hit[label[i]] += pred[i] == label[i];
  }
  double s = 0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < k; ++c)
    if (total[c] > 0) {
      s += hit[c] / total[c];
      ++present;
    }
  return s / double(present);
}

}  // namespace

TEST(BalancedAccuracy, Examples) {
  const std::vector<std::size_t> labels{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(balanced_accuracy(labels, labels, 2), 1.0);
  const std::vector<std::size_t> preds{0, 1, 1, 1};
  EXPECT_DOUBLE_EQ(balanced_accuracy(preds, labels, 2), 0.75);
}

TEST(BalancedAccuracy, ConstantPredictorIsChance) {
  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < 5; ++c)
    for (int i = 0; i < 10; ++i) labels.push_back(c);
  const std::vector<std::size_t> preds(labels.size(), 3);
  EXPECT_DOUBLE_EQ(balanced_accuracy(preds, labels, 5), 0.2);
}

TEST(BalancedAccuracy, AbsentClassesAreExcluded) {
  const std::vector<std::size_t> labels{0, 0, 2}, preds{0, 1, 2};
  EXPECT_DOUBLE_EQ(balanced_accuracy(preds, labels, 4), (0.5 + 1.0) / 2);
}

TEST(BalancedAccuracy, EmptyInputIsUsageError) {
  EXPECT_THROW(balanced_accuracy({}, {}, 3), UsageError);
}

TEST(BalancedAccuracy, MatchesOracleAndRelabelingInvariance) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng() % 5, n = 1 + rng() % 40;
    std::vector<std::size_t> p(n), l(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng() % k;
      l[i] = rng() % k;
    }
    const double ba = balanced_accuracy(p, l, k);
    EXPECT_NEAR(ba, ba_oracle(p, l, k), 1e-15);
    EXPECT_GE(ba, 0.0);
    EXPECT_LE(ba, 1.0);
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::size_t> p2(n), l2(n);
    for (std::size_t i = 0; i < n; ++i) {
      p2[i] = perm[p[i]];
      l2[i] = perm[l[i]];
    }
    EXPECT_NEAR(balanced_accuracy(p2, l2, k), ba, 1e-15);
  }
}

TEST(Combiner, AveragesAndSelects) {
  Rng rng(2);
  const Tensor a = random_rep({2, 3, 4}, rng), b = random_rep({2, 3, 4}, rng);
  const std::vector<ChannelRepresentation> reps{{a, 0}, {b, 1}};
  const Tensor avg = combine_linear(reps, Tensor::from_data({2, 1}, {0.5, 0.5}));
  const Tensor pick_b = combine_linear(reps, Tensor::from_data({2, 1}, {0.0, 1.0}));
  for (std::size_t i = 0; i < a.numel(); ++i) {
    EXPECT_NEAR(avg.data()[i], 0.5 * (a.data()[i] + b.data()[i]), 1e-15);
    EXPECT_EQ(pick_b.data()[i], b.data()[i]);
  }
}

TEST(Combiner, MatchesWeightedSumOracle) {
  Rng rng(3);
  const Tensor a = random_rep({2, 3, 4}, rng), b = random_rep({2, 3, 4}, rng), w = random_rep({2, 1}, rng);
  const std::vector<ChannelRepresentation> reps{{a, 0}, {b, 1}};
  const Tensor z = combine_linear(reps, w);
  ASSERT_EQ(z.shape(), a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i)
    EXPECT_NEAR(z.data()[i], w.data()[0] * a.data()[i] + w.data()[1] * b.data()[i], 1e-12);
}

TEST(Combiner, SingleChannelUnitWeightIsIdentity) {
  Rng rng(4);
  const Tensor a = random_rep({2, 3, 4}, rng);
  const std::vector<ChannelRepresentation> reps{{a, 0}};
  EXPECT_TRUE(std::ranges::equal(combine_linear(reps, Tensor::from_data({1, 1}, {1.0})).data(), a.data()));
}

TEST(Combiner, WeightLengthMismatch) {
  Rng rng(5);
  const std::vector<ChannelRepresentation> reps{{random_rep({1, 2, 4}, rng), 0}, {random_rep({1, 2, 4}, rng), 1}};
  EXPECT_THROW(combine_linear(reps, Tensor::zeros({3, 1})), DimensionError);
}

TEST(Classifier, RowsSumToOne) {
  Rng rng(6);
  const auto params = ClassifierParams::init(64, 5, rng);
  EXPECT_EQ(params.layer.weight.shape(), (Shape{256, 5}));
  const Tensor p = classify(random_rep({3, 64, 33}, rng), params);
  ASSERT_EQ(p.shape(), (Shape{3, 5}));
  for (std::size_t i = 0; i < 3; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 5; ++j) s += p.data()[i * 5 + j];
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Classifier, ZeroWeightsGiveUniform) {
  Rng rng(7);
  auto params = ClassifierParams::init(4, 5, rng);
  for (auto& v : params.layer.weight.mutable_data()) v = 0;
  const Tensor p = classify(random_rep({2, 4, 8}, rng), params);
  for (double v : p.data()) EXPECT_NEAR(v, 0.2, 1e-15);
}

TEST(Classifier, PoolsWithFloorBins) {
  // Identity-like weights expose the pooled features directly.
  Rng rng(8);
  auto params = ClassifierParams::init(1, 4, rng);
  auto w = params.layer.weight.mutable_data();
  std::fill(w.begin(), w.end(), 0.0);
  for (std::size_t i = 0; i < 4; ++i) w[i * 4 + i] = 1.0;
  std::vector<double> ramp(33);
  std::iota(ramp.begin(), ramp.end(), 0.0);
  const Tensor logits = classify_logits(Tensor::from_data({1, 1, 33}, ramp), params);
  // Bins [0,8) [8,16) [16,24) [24,33).
  const double expected[] = {3.5, 11.5, 19.5, 28.0};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(logits.data()[i], expected[i]);
}

TEST(Classifier, ShortRepresentationIsConfigError) {
  Rng rng(9);
  const auto params = ClassifierParams::init(4, 3, rng);
  EXPECT_THROW(classify(random_rep({1, 4, 3}, rng), params), ConfigError);
}

TEST(Classifier, EvalIsBatchIndependent) {
  Rng rng(10);
  const auto params = ClassifierParams::init(4, 3, rng);
  const Tensor z = random_rep({4, 4, 9}, rng);
  const Tensor all = classify(z, params);
  for (std::size_t i = 0; i < 4; ++i) {
    const Tensor one = classify(slice(z, 0, i, 1), params);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(one.data()[j], all.data()[i * 3 + j], 1e-15);
  }
}

TEST(Head, ArgmaxAndNames) {
  const Tensor s = Tensor::from_data({2, 3}, {0.1, 0.7, 0.2, 0.5, 0.2, 0.3});
  EXPECT_EQ(argmax_rows(s), (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(parse_head_type("linear_combiner"), HeadType::LinearCombiner);
  EXPECT_THROW(parse_head_type("attention"), ConfigError);
}
