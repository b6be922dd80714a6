#include <gtest/gtest.h>

#include <json.hpp>

#include "mvts/config.hpp"
#include "mvts/error.hpp"

using namespace mvts;

namespace {

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  EXPECT_EQ(to_json(parse_synth_config("{}")), to_json(SynthConfig{}));
  EXPECT_EQ(to_json(parse_pretrain_config("{}")), to_json(PretrainConfig{}));
  EXPECT_EQ(to_json(parse_finetune_config("{}")), to_json(FinetuneConfig{}));
  EXPECT_EQ(to_json(parse_sweep_config("{}")), to_json(SweepConfig{}));
}

TEST(Config, SerializationIsAFixedPoint) {
  PretrainConfig p;
  p.strategy = ViewStrategy::PerChannel;
  p.loss = LossKind::Cocoa;
  p.loss_config.tau = 0.2;
  p.epochs = 3;
  p.seed = 99;
  p.encoder.widths = {3, 2};
  const auto once = to_json(p);
  EXPECT_EQ(to_json(parse_pretrain_config(once)), once);

  FinetuneConfig f;
  f.mode = FinetuneMode::Probe;
  f.head = HeadType::LinearCombiner;
  f.from_scratch = true;
  f.samples_per_class = 50;
  const auto fj = to_json(f);
  EXPECT_EQ(to_json(parse_finetune_config(fj)), fj);

  SweepConfig s;
  s.samples_per_class = {5, 20};
  s.heads = {HeadType::Mpnn, HeadType::LinearCombiner};
  const auto sj = to_json(s);
  EXPECT_EQ(to_json(parse_sweep_config(sj)), sj);
}

TEST(Config, EveryFieldIsWritten) {
  const auto j = nlohmann::json::parse(to_json(FinetuneConfig{}));
  for (const char* key : {"mode", "lr", "weight_decay", "batch_size", "max_epochs", "patience", "samples_per_class",
                          "seed", "head", "from_scratch", "dropout", "mpnn_rounds", "encoder"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Config, PartialDocumentsKeepDefaults) {
  const auto p = parse_pretrain_config(R"({"epochs": 2, "loss": "nt_xent", "encoder": {"widths": [3, 2]}})");
  EXPECT_EQ(p.epochs, 2u);
  EXPECT_EQ(p.loss, LossKind::NtXent);
  EXPECT_EQ(p.encoder.widths, (std::vector<std::size_t>{3, 2}));
  EXPECT_EQ(p.encoder.hidden_channels, 256u);
  EXPECT_EQ(p.batch_size, 64u);
}

TEST(Config, UnknownKeysAreNamed) {
  const auto msg = message_of([] { parse_pretrain_config(R"({"epochz": 3})"); });
  EXPECT_NE(msg.find("epochz"), std::string::npos) << msg;
  const auto nested = message_of([] { parse_finetune_config(R"({"encoder": {"kernel": 3}})"); });
  EXPECT_NE(nested.find("kernel"), std::string::npos) << nested;
}

TEST(Config, RejectsWrongTypesAndValues) {
  EXPECT_THROW(parse_pretrain_config(R"({"epochs": -1})"), ConfigError);
  EXPECT_THROW(parse_pretrain_config(R"({"epochs": 1.5})"), ConfigError);
  EXPECT_THROW(parse_pretrain_config(R"({"loss": "triplet"})"), ConfigError);
  EXPECT_THROW(parse_pretrain_config(R"({"lr": "fast"})"), ConfigError);
  EXPECT_THROW(parse_pretrain_config("[1, 2]"), ConfigError);
  EXPECT_THROW(parse_pretrain_config("{not json"), ConfigError);
  EXPECT_THROW(parse_finetune_config(R"({"mode": "frozen"})"), ConfigError);
  EXPECT_THROW(parse_finetune_config(R"({"patience": 40, "max_epochs": 40})"), ConfigError);
  EXPECT_THROW(parse_sweep_config(R"({"seeds": []})"), ConfigError);
  EXPECT_THROW(parse_synth_config(R"({"num_classes": 1})"), ConfigError);
}

TEST(Config, SynthFieldsParse) {
  const auto s = parse_synth_config(
      R"({"num_channels": 2, "num_latent_sources": 1, "mixing": [[1.0], [0.5]], "class_bands": [[1, 2], [4, 5]],
          "num_classes": 2, "channel_names": ["x", "y"]})");
  EXPECT_EQ(s.num_channels, 2u);
  EXPECT_EQ(s.mixing[1][0], 0.5);
  EXPECT_EQ(s.class_bands[1][0], 4.0);
  EXPECT_EQ(s.channel_names[1], "y");
}
