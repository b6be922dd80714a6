#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mvts/error.hpp"
#include "mvts/losses.hpp"
#include "mvts/ops.hpp"
#include "mvts/reference_losses.hpp"

using namespace mvts;
namespace ref = mvts::reference;

namespace {

constexpr double e = std::numbers::e;

Tensor random_view(Shape shape, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return Tensor::from_data(std::move(shape), std::move(v));
}

std::vector<Tensor> random_views(std::size_t v, std::size_t n, std::size_t l, std::size_t t, Rng& rng) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < v; ++i) out.push_back(random_view({n, l, t}, rng));
  return out;
}

std::vector<double> raw(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

std::vector<ref::Matrix> flat_views(const std::vector<Tensor>& views) {
  std::vector<ref::Matrix> out;
  for (const auto& v : views) out.push_back(ref::to_matrix(raw(v), v.size(0), v.numel() / v.size(0)));
  return out;
}

std::vector<ref::Sequence> seq_views(const std::vector<Tensor>& views) {
  std::vector<ref::Sequence> out;
  for (const auto& v : views) out.push_back(ref::to_sequence(raw(v), v.size(0), v.size(1), v.size(2)));
  return out;
}

Tensor permute_batch(const Tensor& v, const std::vector<std::size_t>& perm) {
  std::vector<Tensor> rows;
  for (auto i : perm) rows.push_back(slice(v, 0, i, 1));
  return concat(rows, 0);
}

// Two orthogonal unit rows, viewed as [2, D, 1].
Tensor orthogonal_pair() { return Tensor::from_data({2, 2, 1}, {1, 0, 0, 1}); }

}  // namespace

TEST(NtXent, SingleSampleIsExactlyZero) {
  Rng rng(1);
  const auto views = random_views(3, 1, 4, 2, rng);
  EXPECT_EQ(nt_xent(views, 0.5).item(), 0.0);
  const std::vector<Tensor> same{views[0], views[0]};
  EXPECT_EQ(nt_xent(same, 0.5).item(), 0.0);
}

TEST(NtXent, OrthogonalPairClosedForm) {
  // Anchor score e^1, one cross negative e^0 and one same-view negative e^0.
  const Tensor z = orthogonal_pair();
  const std::vector<Tensor> views{z, z};
  EXPECT_NEAR(nt_xent(views, 1.0).item(), std::log(1 + 2 / e), 1e-9);
  EXPECT_NEAR(ref::nt_xent(flat_views(views), 1.0), std::log(1 + 2 / e), 1e-12);
}

TEST(NtXent, PairMatchesDoubleLoopOracle) {
  Rng rng(2);
  const Tensor zw = random_view({4, 8}, rng), zv = random_view({4, 8}, rng);
  EXPECT_NEAR(nt_xent_pair(zw, zv, 0.5).item(), ref::nt_xent_pair(ref::to_matrix(raw(zw), 4, 8), ref::to_matrix(raw(zv), 4, 8), 0.5),
              1e-9);
}

TEST(NtXent, TwoViewsAverageBothOrderedPairs) {
  Rng rng(3);
  const Tensor a = random_view({3, 6}, rng), b = random_view({3, 6}, rng);
  const std::vector<Tensor> views{a, b};
  EXPECT_NEAR(nt_xent(views, 0.7).item(), 0.5 * (nt_xent_pair(a, b, 0.7).item() + nt_xent_pair(b, a, 0.7).item()),
              1e-12);
}

TEST(NtXent, ThreeViewsMatchOracle) {
  Rng rng(4);
  const auto views = random_views(3, 3, 2, 3, rng);
  EXPECT_NEAR(nt_xent(views, 0.5).item(), ref::nt_xent(flat_views(views), 0.5), 1e-9);
}

TEST(NtXent, NonNegative) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) EXPECT_GE(nt_xent(random_views(2, 4, 3, 2, rng), 0.3).item(), 0.0);
}

TEST(NtXent, NeedsTwoViews) {
  Rng rng(6);
  const auto views = random_views(1, 2, 2, 2, rng);
  EXPECT_THROW(nt_xent(views, 0.5), ConfigError);
  EXPECT_THROW(ts2vec(views), ConfigError);
  EXPECT_THROW(cocoa(views, 0.5, 1.0), ConfigError);
}

TEST(NtXent, ShapeMismatch) {
  EXPECT_THROW(nt_xent_pair(Tensor::zeros({2, 3}), Tensor::zeros({2, 4}), 0.5), DimensionError);
}

TEST(Ts2Vec, SingleInstanceSingleStepIsExactlyZero) {
  Rng rng(7);
  const Tensor z = random_view({1, 1, 3}, rng);
  EXPECT_EQ(ts2vec_dual(z, z).item(), 0.0);
  const std::vector<Tensor> views{random_view({1, 3, 1}, rng), random_view({1, 3, 1}, rng)};
  EXPECT_EQ(ts2vec(views).item(), 0.0);
}

TEST(Ts2Vec, DualMatchesQuadrupleLoopOracle) {
  Rng rng(8);
  const Tensor zw = random_view({2, 2, 3}, rng), zv = random_view({2, 2, 3}, rng);
  const auto want = ref::ts2vec_dual(ref::to_sequence(raw(transpose(zw, 1, 2)), 2, 3, 2),
                                     ref::to_sequence(raw(transpose(zv, 1, 2)), 2, 3, 2));
  EXPECT_NEAR(ts2vec_dual(zw, zv).item(), want, 1e-9);
}

TEST(Ts2Vec, DualIsNotScaleInvariant) {
  Rng rng(9);
  const Tensor zw = random_view({2, 2, 3}, rng), zv = random_view({2, 2, 3}, rng);
  EXPECT_NE(ts2vec_dual(zw, zv).item(), ts2vec_dual(scale(zw, 2.0), scale(zv, 2.0)).item());
}

TEST(Ts2Vec, LevelCount) {
  EXPECT_EQ(ts2vec_level_count(1), 1u);
  EXPECT_EQ(ts2vec_level_count(2), 2u);
  // Power-of-two lengths follow ceil(log2 T) + 1.
  for (std::size_t t : {4u, 8u, 16u, 32u})
    EXPECT_EQ(ts2vec_level_count(t), std::size_t(std::ceil(std::log2(double(t)))) + 1);
  // Floor pooling: 5 -> 2 -> 1, 33 -> 16 -> 8 -> 4 -> 2 -> 1.
  EXPECT_EQ(ts2vec_level_count(5), 3u);
  EXPECT_EQ(ts2vec_level_count(33), 6u);
}

TEST(Ts2Vec, SingleStepHierarchyEqualsInstanceOnlyDual) {
  Rng rng(10);
  const Tensor zw = random_view({3, 1, 4}, rng), zv = random_view({3, 1, 4}, rng);
  EXPECT_EQ(ts2vec_hierarchical(zw, zv).item(), ts2vec_dual(zw, zv).item());
}

TEST(Ts2Vec, FourStepsUseThreeLevels) {
  Rng rng(11);
  const Tensor zw = random_view({2, 4, 3}, rng), zv = random_view({2, 4, 3}, rng);
  // Explicit levels T = 4, 2, 1 through the reference pooling.
  auto sw = ref::to_sequence(raw(transpose(zw, 1, 2)), 2, 3, 4), sv = ref::to_sequence(raw(transpose(zv, 1, 2)), 2, 3, 4);
  double total = 0;
  for (int level = 0; level < 3; ++level) {
    total += ref::ts2vec_dual(sw, sv);
    sw = ref::maxpool_time(sw);
    sv = ref::maxpool_time(sv);
  }
  EXPECT_NEAR(ts2vec_hierarchical(zw, zv).item(), total / 3, 1e-9);
}

TEST(Ts2Vec, ThreeViewsMatchOracle) {
  Rng rng(12);
  const auto views = random_views(3, 3, 4, 4, rng);
  EXPECT_NEAR(ts2vec(views, true).item(), ref::ts2vec(seq_views(views), true), 1e-9);
  EXPECT_NEAR(ts2vec(views, false).item(), ref::ts2vec(seq_views(views), false), 1e-9);
}

TEST(Cocoa, IdenticalUnitVectorsClosedForm) {
  const Tensor z = Tensor::from_data({2, 1, 1}, {1, 1});
  const std::vector<Tensor> views{z, z};
  EXPECT_NEAR(cocoa(views, 1.0, 1.0).item(), 4 + 2 * e, 1e-9);
  EXPECT_NEAR(ref::cocoa(flat_views(views), 1.0, 1.0), 4 + 2 * e, 1e-9);
}

TEST(Cocoa, SingleSampleHasNoDiscriminatorTerm) {
  Rng rng(13);
  const auto views = random_views(2, 1, 3, 2, rng);
  const double s = scaled_cosine_similarity(reshape(views[0], {1, 6}), reshape(views[1], {1, 6}), 0.5).item();
  EXPECT_NEAR(cocoa(views, 0.5, 3.0).item(), 2 * std::exp(1 / 0.5 - s), 1e-12);
}

TEST(Cocoa, MatchesTripleLoopOracle) {
  Rng rng(14);
  const auto views = random_views(3, 3, 5, 1, rng);
  EXPECT_NEAR(cocoa(views, 0.5, 0.8).item(), ref::cocoa(flat_views(views), 0.5, 0.8), 1e-9);
}

TEST(Cocoa, ClampsLargeExponents) {
  const Tensor z = Tensor::from_data({2, 1, 1}, {1, 1});
  const std::vector<Tensor> views{z, z};
  LossDiagnostics diag;
  const double v = cocoa(views, 0.01, 1.0, &diag).item();
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(diag.clamped_exponents, 0u);
}

TEST(Losses, RandomOracleEquivalence) {
  Rng rng(15);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 1 + rng() % 4, v = 2 + rng() % 2, t = 1 + rng() % 4, l = 1 + rng() % 6;
    const auto views = random_views(v, n, l, t, rng);
    EXPECT_NEAR(nt_xent(views, 0.5).item(), ref::nt_xent(flat_views(views), 0.5), 1e-9);
    EXPECT_NEAR(ts2vec(views).item(), ref::ts2vec(seq_views(views)), 1e-9);
    EXPECT_NEAR(cocoa(views, 0.5, 1.0).item(), ref::cocoa(flat_views(views), 0.5, 1.0), 1e-9);
  }
}

TEST(Losses, ViewPermutationInvariance) {
  Rng rng(16);
  const auto views = random_views(3, 3, 2, 4, rng);
  const std::vector<Tensor> rotated{views[2], views[0], views[1]};
  EXPECT_NEAR(nt_xent(views, 0.5).item(), nt_xent(rotated, 0.5).item(), 1e-12);
  EXPECT_NEAR(ts2vec(views).item(), ts2vec(rotated).item(), 1e-12);
  EXPECT_NEAR(cocoa(views, 0.5, 1.0).item(), cocoa(rotated, 0.5, 1.0).item(), 1e-12);
}

TEST(Losses, BatchPermutationInvariance) {
  Rng rng(17);
  const auto views = random_views(2, 4, 3, 4, rng);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<Tensor> permuted;
  for (const auto& v : views) permuted.push_back(permute_batch(v, perm));
  EXPECT_NEAR(nt_xent(views, 0.5).item(), nt_xent(permuted, 0.5).item(), 1e-12);
  EXPECT_NEAR(ts2vec(views).item(), ts2vec(permuted).item(), 1e-12);
  EXPECT_NEAR(cocoa(views, 0.5, 1.0).item(), cocoa(permuted, 0.5, 1.0).item(), 1e-12);
}

TEST(Losses, CosineLossesIgnorePerVectorScale) {
  Rng rng(18);
  const auto views = random_views(2, 3, 2, 2, rng);
  std::vector<Tensor> scaled;
  for (const auto& v : views) {
    std::vector<double> d = raw(v);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 0.5 + double(i / 4);  // one factor per sample row
    scaled.push_back(Tensor::from_data(v.shape(), std::move(d)));
  }
  EXPECT_NEAR(nt_xent(views, 0.5).item(), nt_xent(scaled, 0.5).item(), 1e-9);
  EXPECT_NEAR(cocoa(views, 0.5, 1.0).item(), cocoa(scaled, 0.5, 1.0).item(), 1e-9);
  EXPECT_NE(ts2vec(views).item(), ts2vec(scaled).item());
}

TEST(Losses, ConfigValidationAndNames) {
  LossConfig c;
  c.tau = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.lambda = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_loss_kind("cocoa"), LossKind::Cocoa);
  EXPECT_STREQ(to_string(LossKind::Ts2Vec), "ts2vec");
  EXPECT_THROW(parse_loss_kind("infonce"), ConfigError);
}
