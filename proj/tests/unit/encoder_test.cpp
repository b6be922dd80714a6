#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "mvts/encoder.hpp"
#include "mvts/error.hpp"
#include "mvts/ops.hpp"

using namespace mvts;

namespace {

EncoderConfig small_config() {
  EncoderConfig c;
  c.hidden_channels = 8;
  c.output_channels = 4;
  c.hidden_groups = 4;
  c.output_groups = 2;
  c.widths = {3, 2, 2};
  return c;
}

Tensor random_batch(Shape shape, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = uniform(rng, -2.0, 2.0);
  return Tensor::from_data(std::move(shape), std::move(v));
}

// Per-layer length recurrence floor((T + 2p - k) / s) + 1 with s = k.
std::size_t length_oracle(std::size_t t, const EncoderConfig& c) {
  for (auto w : c.widths) t = (t + 2 * c.padding - w) / w + 1;
  return t;
}

}  // namespace

TEST(Encoder, OutputLengthForThirtySecondWindows) {
  EXPECT_EQ(encoder_output_len(3000), 33u);
  EXPECT_EQ(encoder_output_len(96), 2u);
  EXPECT_EQ(encoder_output_len(300), 5u);
}

TEST(Encoder, OutputLengthMatchesRecurrence) {
  const EncoderConfig c;
  for (std::size_t t : {40u, 97u, 255u, 1000u, 2999u, 3001u, 6000u}) EXPECT_EQ(encoder_output_len(t, c), length_oracle(t, c));
}

TEST(Encoder, ShortInputNamesFailingBlock) {
  EncoderConfig c;
  c.widths = {3, 2};
  c.padding = 0;
  try {
    encoder_output_len(4, c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("block 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(encoder_output_len(0), ConfigError);
}

TEST(Encoder, FullSizeForwardShape) {
  Rng rng(1);
  const auto params = EncoderParams::init({}, rng);
  const auto rep = encode(random_batch({2, 1, 3000}, rng), params, ForwardMode::eval());
  EXPECT_EQ(rep.values.shape(), (Shape{2, 64, 33}));
}

TEST(Encoder, RejectsMultiChannelInput) {
  Rng rng(2);
  const auto params = EncoderParams::init(small_config(), rng);
  EXPECT_THROW(encode(Tensor::zeros({1, 2, 64}), params, ForwardMode::eval()), UsageError);
}

TEST(Encoder, EvalIsDeterministicAndBatchIndependent) {
  Rng rng(3);
  const auto params = EncoderParams::init(small_config(), rng);
  Tensor x = random_batch({3, 1, 64}, rng);
  const auto full = encode(x, params, ForwardMode::eval()).values;
  const auto again = encode(x, params, ForwardMode::eval()).values;
  EXPECT_TRUE(std::ranges::equal(full.data(), again.data()));
  const std::size_t per = full.numel() / 3;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto one = encode(slice(x, 0, i, 1), params, ForwardMode::eval()).values;
    for (std::size_t j = 0; j < per; ++j) EXPECT_NEAR(one.data()[j], full.data()[i * per + j], 1e-12);
  }
}

TEST(Encoder, ChannelsShareWeights) {
  Rng rng(4);
  const auto params = EncoderParams::init(small_config(), rng);
  Tensor x = random_batch({2, 3, 64}, rng);
  const auto reps = encode_channels(x, params, ForwardMode::eval());
  ASSERT_EQ(reps.size(), 3u);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(reps[c].source_channel, c);
    const auto direct = encode(slice(x, 1, c, 1), params, ForwardMode::eval()).values;
    EXPECT_TRUE(std::ranges::equal(direct.data(), reps[c].values.data()));
  }
}

TEST(Encoder, TrainingModeAppliesDropout) {
  Rng rng(5);
  const auto params = EncoderParams::init(small_config(), rng);
  Tensor x = random_batch({2, 1, 64}, rng);
  Rng drop(9);
  const auto train = encode(x, params, ForwardMode::training(drop)).values;
  const auto eval = encode(x, params, ForwardMode::eval()).values;
  EXPECT_FALSE(std::ranges::equal(train.data(), eval.data()));
}

TEST(Encoder, ParameterNamesAreUnique) {
  Rng rng(6);
  const auto names = EncoderParams::init({}, rng).named_parameters();
  std::set<std::string> seen;
  for (const auto& p : names) EXPECT_TRUE(seen.insert(p.name).second) << p.name;
  EXPECT_EQ(names.size(), 3u * 7u);
}

TEST(Encoder, ConfigValidation) {
  EncoderConfig c;
  c.hidden_groups = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.widths.clear();
  EXPECT_THROW(c.validate(), ConfigError);
}
