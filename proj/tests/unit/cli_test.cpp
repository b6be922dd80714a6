#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mvts/checkpoint.hpp"
#include "mvts/data.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(MVTS_CLI_PATH) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) o.output.append(buf, n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t line_count(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

const char* kEncoder =
    R"("encoder": {"hidden_channels": 8, "output_channels": 4, "hidden_groups": 4, "output_groups": 2, "widths": [3, 2]})";

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("mvts_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    write(dir_ / "synth.json",
          R"({"num_channels": 4, "num_classes": 3, "windows_per_class": 40, "sample_rate_hz": 24, "window_seconds": 2,
              "class_bands": [[1, 2], [4, 5], [7, 8]], "seed": 3})");
    write(dir_ / "pretrain.json", std::string(R"({"epochs": 2, "batch_size": 8, "seed": 9, )") + kEncoder + "}");
    write(dir_ / "finetune.json",
          std::string(R"({"samples_per_class": 3, "max_epochs": 3, "patience": 1, "seed": 1234, )") + kEncoder + "}");
    const auto synth = run("synth --config " + (dir_ / "synth.json").string() + " --out " + (dir_ / "data").string());
    ASSERT_EQ(synth.code, 0) << synth.output;
    const auto pre = run("pretrain --config " + (dir_ / "pretrain.json").string() + " --train " + data("train") +
                         " --val " + data("val") + " --out " + (dir_ / "model.ckpt").string());
    ASSERT_EQ(pre.code, 0) << pre.output;
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string data(const char* split) { return (dir_ / "data" / (std::string(split) + ".cts")).string(); }
  static std::string splits() {
    return " --train " + data("train") + " --val " + data("val") + " --test " + data("test");
  }

  static inline fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthWritesSplitsAndConfigEcho) {
  for (const char* f : {"config.json", "train.cts", "val.cts", "test.cts"}) EXPECT_TRUE(fs::exists(dir_ / "data" / f)) << f;
  const auto train = mvts::read_cts(data("train"));
  const auto val = mvts::read_cts(data("val"));
  const auto test = mvts::read_cts(data("test"));
  EXPECT_EQ(train.num_windows + val.num_windows + test.num_windows, 120u);
  EXPECT_EQ(train.num_windows, 72u);
  EXPECT_NE(slurp(dir_ / "data" / "config.json").find("\"seed\": 3"), std::string::npos);
}

TEST_F(Cli, PretrainWritesCheckpointLogAndConfig) {
  EXPECT_EQ(mvts::load_checkpoint(dir_ / "model.ckpt").seed, 9u);
  const auto log = slurp(dir_ / "model.log.csv");
  EXPECT_EQ(log.rfind("epoch,train_loss,val_loss,wall_seconds\n", 0), 0u);
  EXPECT_EQ(line_count(log), 3u);
  EXPECT_NE(slurp(dir_ / "model.config.json").find("\"epochs\": 2"), std::string::npos);
}

TEST_F(Cli, FinetuneRecordsSeedInMetrics) {
  const auto out = dir_ / "ft";
  const auto r = run("finetune --config " + (dir_ / "finetune.json").string() + " --checkpoint " +
                     (dir_ / "model.ckpt").string() + splits() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto metrics = slurp(out / "metrics.csv");
  EXPECT_EQ(line_count(metrics), 2u);
  EXPECT_NE(metrics.find("full,ts2vec,two_group,mpnn,3,1234,"), std::string::npos) << metrics;
  EXPECT_TRUE(fs::exists(out / "config.json"));
}

TEST_F(Cli, FinetuneScratchUsesScratchLabels) {
  const auto out = dir_ / "ft_scratch";
  const auto r =
      run("finetune --config " + (dir_ / "finetune.json").string() + " --scratch" + splits() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(slurp(out / "metrics.csv").find("full,scratch,none,mpnn,3,1234,"), std::string::npos);
}

TEST_F(Cli, FinetuneSourceFlagsAreExclusive) {
  const auto both = run("finetune --scratch --checkpoint " + (dir_ / "model.ckpt").string() + splits() + " --out " +
                        (dir_ / "x").string());
  EXPECT_EQ(both.code, 2) << both.output;
  const auto neither = run("finetune" + splits() + " --out " + (dir_ / "y").string());
  EXPECT_EQ(neither.code, 2) << neither.output;
}

TEST_F(Cli, SweepWritesTables) {
  write(dir_ / "sweep.json", std::string(R"({"samples_per_class": [2, 3], "seeds": [0, 1], "modes": ["probe"],
      "finetune": {"max_epochs": 2, "patience": 1, )") + kEncoder + "}}");
  const auto out = dir_ / "sweep";
  const auto r = run("sweep --config " + (dir_ / "sweep.json").string() + " --checkpoint " +
                     (dir_ / "model.ckpt").string() + splits() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(line_count(slurp(out / "runs.csv")), 1u + 8u);
  const auto agg = slurp(out / "aggregate.csv");
  EXPECT_EQ(agg.rfind("model,pretraining,mode,n2,n3,failures\n", 0), 0u);
  EXPECT_EQ(line_count(agg), 3u);
  EXPECT_NE(slurp(out / "plot.svg").find("<polyline"), std::string::npos);
}

TEST_F(Cli, BadInputsMapToExitCodes) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  write(dir_ / "bad.json", R"({"epochz": 1})");
  const auto bad = run("pretrain --config " + (dir_ / "bad.json").string() + " --train " + data("train") + " --out " +
                       (dir_ / "bad.ckpt").string());
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.output.find("epochz"), std::string::npos) << bad.output;
  write(dir_ / "garbage.ckpt", "not a checkpoint");
  const auto corrupt = run("finetune --config " + (dir_ / "finetune.json").string() + " --checkpoint " +
                           (dir_ / "garbage.ckpt").string() + splits() + " --out " + (dir_ / "z").string());
  EXPECT_EQ(corrupt.code, 1);
  EXPECT_NE(corrupt.output.find("offset 0"), std::string::npos) << corrupt.output;
}

TEST_F(Cli, GradcheckPassesAndCatchesInjectedBug) {
  const auto ok = run("gradcheck --instances 2 --oracle-instances 5");
  EXPECT_EQ(ok.code, 0) << ok.output;
  EXPECT_NE(ok.output.find("all checks passed"), std::string::npos);
  const auto bad = run("gradcheck --instances 2 --oracle-instances 5 --inject-bug");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.output.find("FAIL gradient broken_square"), std::string::npos) << bad.output;
}
