#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvts/checkpoint.hpp"
#include "mvts/data.hpp"
#include "mvts/encoder.hpp"
#include "mvts/head.hpp"
#include "mvts/losses.hpp"
#include "mvts/mpnn.hpp"
#include "mvts/views.hpp"

namespace mvts {

struct PretrainConfig {
  ViewStrategy strategy = ViewStrategy::TwoGroup;
  LossKind loss = LossKind::Ts2Vec;
  LossConfig loss_config;
  std::size_t epochs = 10;
  double lr = 1e-3;
  double weight_decay = 1e-2;
  std::size_t batch_size = 64;
  // Overrides encoder.dropout and the MPNN dropout.
  double dropout = 0.1;
  std::uint64_t seed = 0;
  std::size_t mpnn_rounds = 1;
  EncoderConfig encoder;

  void validate() const;
};

enum class FinetuneMode { Full, Probe };
const char* to_string(FinetuneMode m);
FinetuneMode parse_finetune_mode(const std::string& name);

struct FinetuneConfig {
  FinetuneMode mode = FinetuneMode::Full;
  double lr = 5e-4;
  double weight_decay = 1e-2;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 40;
  std::size_t patience = 7;
  std::size_t samples_per_class = 10;
  std::uint64_t seed = 0;
  HeadType head = HeadType::Mpnn;
  bool from_scratch = false;
  double dropout = 0.1;
  // Architecture of a freshly initialized backbone; ignored when a checkpoint
  // supplies one.
  std::size_t mpnn_rounds = 1;
  EncoderConfig encoder;

  void validate() const;
};

// Shared encoder plus the MPNN aggregator (present for two-group models).
struct Backbone {
  EncoderParams encoder;
  std::optional<MpnnParams> mpnn;

  ParameterList named_parameters() const;
};

Backbone init_backbone(const EncoderConfig& encoder, std::optional<MpnnConfig> mpnn, Rng& rng);
// Rebuilds the architecture recorded in the checkpoint's config echo and loads
// its weights. `dropout` replaces the recorded rate.
Backbone backbone_from_checkpoint(const ModelCheckpoint& checkpoint, std::optional<double> dropout = {});

// Stream identifiers for derive_seed; one generator per concern keeps runs
// reproducible when unrelated consumers change.
enum class SeedStream : std::uint64_t {
  Init = 1,
  Shuffle = 2,
  Dropout = 3,
  Partition = 4,
  ValidationPartition = 5,
  Sampling = 6,
  Head = 7,
};

struct PretrainEpochLog {
  std::size_t epoch = 0;
  double train_loss = 0;
  // NaN when the validation set is empty.
  double val_loss = 0;
  double wall_seconds = 0;
};

struct PretrainResult {
  ModelCheckpoint checkpoint;
  Backbone backbone;
  std::vector<double> step_losses;
  std::vector<PretrainEpochLog> epochs;
  std::size_t clamped_exponents = 0;
};

using PretrainProgress = std::function<void(const PretrainEpochLog&)>;

PretrainResult pretrain(const PretrainConfig& config, const WindowedDataset& train, const WindowedDataset& val,
                        const PretrainProgress& progress = {});

struct FinetuneHooks {
  // Replaces the measured validation loss of a (1-based) epoch.
  std::function<double(std::size_t epoch, double measured)> validation_loss;
};

struct FinetuneResult {
  double balanced_accuracy = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  std::vector<double> train_losses;
  std::vector<double> val_losses;
  // Pretraining provenance: loss name and view strategy, or "scratch"/"none".
  std::string pretraining = "scratch";
  std::string strategy = "none";
  HeadType head = HeadType::Mpnn;
  Backbone backbone;
  ClassifierParams classifier;
  Tensor combiner;  // [C_d, 1] for the linear head
};

FinetuneResult finetune(const FinetuneConfig& config, const ModelCheckpoint* checkpoint,
                        const WindowedDataset& labeled, const WindowedDataset& val, const WindowedDataset& test,
                        const FinetuneHooks& hooks = {});

// Eval-mode class scores of a fine-tuned model.
Tensor predict(const FinetuneResult& model, const WindowedDataset& ds);

struct PretrainingLabels {
  std::string loss = "scratch";
  std::string strategy = "none";
};
// Labels for runs starting from `checkpoint`; scratch labels for null.
PretrainingLabels pretraining_labels(const ModelCheckpoint* checkpoint);

// Fixed per-run metrics row: mode,pretraining,strategy,head,n_per_class,seed,balanced_accuracy
std::string metrics_csv_header();
std::string metrics_csv_row(const FinetuneConfig& config, const std::string& pretraining, const std::string& strategy,
                            double balanced_accuracy);

struct SweepConfig {
  std::vector<std::size_t> samples_per_class{10, 50};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::vector<FinetuneMode> modes{FinetuneMode::Full, FinetuneMode::Probe};
  std::vector<HeadType> heads{HeadType::Mpnn};
  bool include_scratch = true;
  bool include_pretrained = true;
  // Template for every cell; mode, head, samples_per_class, seed and
  // from_scratch are overwritten per run.
  FinetuneConfig finetune;

  void validate() const;
};

struct SweepRun {
  FinetuneConfig config;
  std::string pretraining;
  std::string strategy;
  double balanced_accuracy = 0;
  bool failed = false;
  std::string error;
};

struct SweepRow {
  std::string model;        // head type
  std::string pretraining;  // loss name or "scratch"
  std::string mode;
  std::vector<double> means;  // one per column, NaN when every run failed
  std::size_t failures = 0;
};

struct SweepTable {
  std::vector<std::size_t> columns;  // samples per class
  std::vector<SweepRow> rows;
  std::vector<SweepRun> runs;
};

// Expands the grid into (cell, seed) runs. Rows are model x pretraining x mode.
std::vector<FinetuneConfig> sweep_grid(const SweepConfig& config, bool have_checkpoint);

// Runs every config in `grid`, each once per seed in `seeds`, on up to
// `threads` worker threads. Failed runs are recorded and excluded from means.
SweepTable sweep(std::span<const FinetuneConfig> grid, std::span<const std::uint64_t> seeds,
                 const ModelCheckpoint* checkpoint, const WindowedDataset& labeled, const WindowedDataset& val,
                 const WindowedDataset& test, std::size_t threads = 1,
                 const std::function<void(const SweepRun&)>& progress = {});

// Per-run rows in run order, balanced accuracy printed with %.17g.
std::string sweep_runs_csv(const SweepTable& table);
// model,pretraining,mode,n<k>...,failures
std::string sweep_aggregate_csv(const SweepTable& table);
// Accuracy against samples per class, one polyline per row.
std::string sweep_svg(const SweepTable& table);

}  // namespace mvts
