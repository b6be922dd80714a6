#include <gtest/gtest.h>

#include <cmath>

#include "mvts/error.hpp"
#include "mvts/gradcheck.hpp"
#include "mvts/ops.hpp"
#include "mvts/tensor.hpp"

using namespace mvts;

TEST(Tensor, FromDataRejectsWrongLength) {
  EXPECT_THROW(Tensor::from_data({2, 3}, std::vector<double>(5)), DimensionError);
}

TEST(Tensor, BackwardRequiresScalarRoot) {
  Tensor a = Tensor::full({2}, 1.0, true);
  EXPECT_THROW(scale(a, 2.0).backward(), UsageError);
}

TEST(Tensor, BackwardRequiresGradOnRoot) {
  Tensor a = Tensor::full({2}, 1.0);
  EXPECT_THROW(sum(a).backward(), UsageError);
}

TEST(Tensor, LeafGradientsAccumulateAcrossCalls) {
  Tensor a = Tensor::from_data({3}, {1, 2, 3}, true);
  sum(mul(a, a)).backward();
  sum(mul(a, a)).backward();
  const std::vector<double> expected{4, 8, 12};
  EXPECT_EQ(std::vector<double>(a.grad().begin(), a.grad().end()), expected);
  a.zero_grad();
  EXPECT_FALSE(a.has_grad());
}

TEST(Tensor, SharedSubgraphGradientsSum) {
  // y = a*a + a*a through one shared node.
  Tensor a = Tensor::from_data({1}, {1.5}, true);
  Tensor sq = mul(a, a);
  sum(add(sq, sq)).backward();
  EXPECT_DOUBLE_EQ(a.grad()[0], 4 * 1.5);
}

TEST(Tensor, NoGradGuardStopsRecording) {
  Tensor a = Tensor::full({2}, 1.0, true);
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_enabled());
    EXPECT_FALSE(sum(a).requires_grad());
  }
  EXPECT_TRUE(grad_enabled());
  EXPECT_TRUE(sum(a).requires_grad());
}

TEST(Tensor, DetachCutsGraph) {
  Tensor a = Tensor::full({2}, 1.0, true);
  Tensor d = scale(a, 3.0).detach();
  EXPECT_FALSE(d.requires_grad());
  EXPECT_EQ(d.data()[0], 3.0);
}

TEST(Tensor, SetRequiresGradOnlyOnLeaves) {
  Tensor a = Tensor::full({2}, 1.0, true);
  Tensor b = scale(a, 2.0);
  EXPECT_THROW(b.set_requires_grad(false), UsageError);
}

TEST(Tensor, DeepChainDoesNotOverflowStack) {
  Tensor a = Tensor::scalar(1.0, true);
  Tensor x = a;
  for (int i = 0; i < 100000; ++i) x = add_scalar(x, 0.0);
  x.backward();
  EXPECT_EQ(a.grad()[0], 1.0);
}

class GradientSuite : public ::testing::TestWithParam<std::string> {};

TEST_P(GradientSuite, MatchesCentralDifferences) {
  for (const auto& c : gradcheck_cases()) {
    if (c.name != GetParam()) continue;
    const auto report = run_gradcheck(c, {});
    EXPECT_TRUE(report.passed) << c.name << " max_rel_err=" << report.max_relative_error << " " << report.error;
    EXPECT_EQ(report.instances, 20u);
    return;
  }
  FAIL() << "no case named " << GetParam();
}

std::vector<std::string> case_names() {
  std::vector<std::string> names;
  for (const auto& c : gradcheck_cases()) names.push_back(c.name);
  return names;
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradientSuite, ::testing::ValuesIn(case_names()),
                         [](const auto& info) { return info.param; });

TEST(Gradcheck, FlagsWrongBackward) {
  const auto report = run_gradcheck(broken_gradcheck_case(), {});
  EXPECT_FALSE(report.passed);
  EXPECT_GT(report.max_relative_error, 0.1);
}

TEST(Gradcheck, RegistryCoversLossesAndStacks) {
  const auto names = case_names();
  for (const char* required : {"nt_xent", "ts2vec", "cocoa", "conv1d", "group_norm_affine", "encoder", "mpnn_aggregate"})
    EXPECT_NE(std::find(names.begin(), names.end(), required), names.end()) << required;
}
