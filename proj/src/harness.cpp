#include "mvts/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "mvts/config.hpp"
#include "mvts/error.hpp"
#include "mvts/ops.hpp"
#include "mvts/optim.hpp"

namespace mvts {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kEvalChunk = 64;

Rng stream_rng(std::uint64_t seed, SeedStream stream) { return make_rng(seed, std::uint64_t(stream)); }

MpnnConfig mpnn_config_for(const EncoderConfig& encoder, std::size_t rounds, double dropout) {
  MpnnConfig m;
  m.dim = encoder.output_channels;
  m.readout_hidden = encoder.output_channels;
  m.rounds = rounds;
  m.dropout = dropout;
  return m;
}

void require_rate(double value, const char* name) {
  if (!(value > 0) || !std::isfinite(value)) throw ConfigError(std::string(name) + " must be positive");
}

void require_dropout(double value) {
  if (!(value >= 0 && value < 1)) throw ConfigError("dropout must lie in [0, 1)");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::size_t> iota_indices(std::size_t n, std::size_t start = 0) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), start);
  return idx;
}

// Rows `indices` of a [N, ...] tensor, without gradient tracking.
Tensor gather_rows(const Tensor& t, std::span<const std::size_t> indices) {
  const std::size_t row = t.numel() / t.size(0);
  std::vector<double> out;
  out.reserve(indices.size() * row);
  const auto src = t.data();
  for (auto i : indices) out.insert(out.end(), src.begin() + i * row, src.begin() + (i + 1) * row);
  Shape shape = t.shape();
  shape[0] = indices.size();
  return Tensor::from_data(std::move(shape), std::move(out));
}

Tensor concat_rows(std::vector<Tensor> parts) {
  if (parts.size() == 1) return parts.front();
  return concat(parts, 0);
}

void check_compatible(const WindowedDataset& a, const WindowedDataset& b, const char* what) {
  if (b.num_windows == 0) return;
  if (a.num_channels != b.num_channels)
    throw ConfigError(std::string(what) + " has " + std::to_string(b.num_channels) + " channels, expected " +
                      std::to_string(a.num_channels));
  if (a.window_length != b.window_length)
    throw ConfigError(std::string(what) + " has window length " + std::to_string(b.window_length) + ", expected " +
                      std::to_string(a.window_length));
}

ViewSet build_views(std::span<const ChannelRepresentation> reps, const Backbone& backbone, ViewStrategy strategy,
                    PartitionSampler* sampler, ForwardMode mode) {
  if (strategy == ViewStrategy::PerChannel) return per_channel_views(reps);
  return two_group_views(reps, sampler->next(reps.size()), *backbone.mpnn, mode);
}

std::vector<std::vector<double>> snapshot(std::span<const Tensor> params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.data().begin(), p.data().end());
  return out;
}

void restore(std::span<Tensor> params, const std::vector<std::vector<double>>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) std::ranges::copy(values[i], params[i].mutable_data().begin());
}

// Model pieces used by fine-tuning and prediction.
struct HeadModel {
  const Backbone& backbone;
  HeadType head;
  const ClassifierParams& classifier;
  const Tensor& combiner;

  // Representation z [B, L, T_out] of raw windows.
  Tensor represent(const Tensor& x, ForwardMode mode) const {
    auto reps = encode_channels(x, backbone.encoder, mode);
    if (head == HeadType::Mpnn) return aggregate(reps, *backbone.mpnn, mode);
    return combine_linear(reps, combiner);
  }

  // Frozen per-channel (linear head) or aggregated (MPNN head) features in
  // eval mode, one [N, L, T_out] tensor per entry.
  std::vector<Tensor> frozen_features(const WindowedDataset& ds) const {
    NoGradGuard guard;
    std::vector<std::vector<Tensor>> chunks;
    for (std::size_t start = 0; start < ds.num_windows; start += kEvalChunk) {
      const auto idx = iota_indices(std::min(kEvalChunk, ds.num_windows - start), start);
      auto reps = encode_channels(batch_tensor(ds, idx), backbone.encoder, ForwardMode::eval());
      std::vector<Tensor> parts;
      if (head == HeadType::Mpnn) {
        parts.push_back(aggregate(reps, *backbone.mpnn, ForwardMode::eval()));
      } else {
        for (auto& r : reps) parts.push_back(r.values);
      }
      chunks.push_back(std::move(parts));
    }
    std::vector<Tensor> out;
    const std::size_t entries = chunks.front().size();
    for (std::size_t e = 0; e < entries; ++e) {
      std::vector<Tensor> parts;
      for (auto& c : chunks) parts.push_back(c[e]);
      out.push_back(concat_rows(std::move(parts)));
    }
    return out;
  }

  Tensor from_frozen(const std::vector<Tensor>& features, std::span<const std::size_t> idx) const {
    if (head == HeadType::Mpnn) return gather_rows(features.front(), idx);
    std::vector<ChannelRepresentation> reps;
    for (std::size_t c = 0; c < features.size(); ++c) reps.push_back({gather_rows(features[c], idx), c});
    return combine_linear(reps, combiner);
  }
};

}  // namespace

void PretrainConfig::validate() const {
  loss_config.validate();
  encoder.validate();
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (mpnn_rounds == 0) throw ConfigError("mpnn_rounds must be at least 1");
  require_rate(lr, "lr");
  if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be non-negative");
  require_dropout(dropout);
}

const char* to_string(FinetuneMode m) { return m == FinetuneMode::Full ? "full" : "probe"; }

FinetuneMode parse_finetune_mode(const std::string& name) {
  if (name == "full") return FinetuneMode::Full;
  if (name == "probe") return FinetuneMode::Probe;
  throw ConfigError("unknown fine-tuning mode '" + name + "' (expected full or probe)");
}

void FinetuneConfig::validate() const {
  encoder.validate();
  if (samples_per_class == 0) throw ConfigError("samples_per_class must be at least 1");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  if (patience >= max_epochs) throw ConfigError("patience must be smaller than max_epochs");
  if (mpnn_rounds == 0) throw ConfigError("mpnn_rounds must be at least 1");
  require_rate(lr, "lr");
  if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be non-negative");
  require_dropout(dropout);
}

void SweepConfig::validate() const {
  finetune.validate();
  if (samples_per_class.empty()) throw ConfigError("sweep needs at least one samples_per_class value");
  for (auto n : samples_per_class)
    if (n == 0) throw ConfigError("samples_per_class values must be at least 1");
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  if (modes.empty()) throw ConfigError("sweep needs at least one mode");
  if (heads.empty()) throw ConfigError("sweep needs at least one head");
  if (!include_scratch && !include_pretrained) throw ConfigError("sweep excludes both scratch and pretrained runs");
}

ParameterList Backbone::named_parameters() const {
  ParameterList out = encoder.named_parameters();
  if (mpnn) {
    auto m = mpnn->named_parameters();
    out.insert(out.end(), m.begin(), m.end());
  }
  return out;
}

Backbone init_backbone(const EncoderConfig& encoder, std::optional<MpnnConfig> mpnn, Rng& rng) {
  Backbone b{EncoderParams::init(encoder, rng), std::nullopt};
  if (mpnn) b.mpnn = MpnnParams::init(*mpnn, rng);
  return b;
}

Backbone backbone_from_checkpoint(const ModelCheckpoint& checkpoint, std::optional<double> dropout) {
  PretrainConfig cfg = parse_pretrain_config(checkpoint.config_json);
  if (dropout) {
    require_dropout(*dropout);
    cfg.dropout = *dropout;
  }
  EncoderConfig enc = cfg.encoder;
  enc.dropout = cfg.dropout;
  std::optional<MpnnConfig> m;
  if (checkpoint.find("mpnn.readout0.weight")) m = mpnn_config_for(enc, cfg.mpnn_rounds, cfg.dropout);
  Rng rng(0);
  Backbone b = init_backbone(enc, m, rng);
  load_parameters(checkpoint, b.named_parameters());
  return b;
}

PretrainResult pretrain(const PretrainConfig& config, const WindowedDataset& train, const WindowedDataset& val,
                        const PretrainProgress& progress) {
  config.validate();
  train.validate();
  val.validate();
  if (train.num_windows == 0) throw ConfigError("pretraining set is empty");
  check_compatible(train, val, "validation set");
  const std::size_t c = train.num_channels;
  if (config.strategy == ViewStrategy::PerChannel && c < 2)
    throw ConfigError("per_channel views need at least 2 channels, dataset has " + std::to_string(c));
  if (config.strategy == ViewStrategy::TwoGroup && c < 4)
    throw ConfigError("two_group views need at least 4 channels, dataset has " + std::to_string(c));
  encoder_output_len(train.window_length, config.encoder);

  EncoderConfig enc = config.encoder;
  enc.dropout = config.dropout;
  std::optional<MpnnConfig> mcfg;
  if (config.strategy == ViewStrategy::TwoGroup) mcfg = mpnn_config_for(enc, config.mpnn_rounds, config.dropout);

  Rng init_rng = stream_rng(config.seed, SeedStream::Init);
  PretrainResult result;
  result.backbone = init_backbone(enc, mcfg, init_rng);
  const ParameterList named = result.backbone.named_parameters();
  AdamWOptions opts;
  opts.lr = config.lr;
  opts.weight_decay = config.weight_decay;
  AdamW optimizer(tensors_of(named), opts);

  Rng shuffle_rng = stream_rng(config.seed, SeedStream::Shuffle);
  Rng dropout_rng = stream_rng(config.seed, SeedStream::Dropout);
  PartitionSampler sampler(derive_seed(config.seed, std::uint64_t(SeedStream::Partition)));
  LossDiagnostics diag;
  std::vector<std::size_t> order = iota_indices(train.num_windows);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double weighted = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(config.batch_size, order.size() - start));
      const ForwardMode mode = ForwardMode::training(dropout_rng);
      auto reps = encode_channels(batch_tensor(train, idx), result.backbone.encoder, mode);
      const ViewSet views = build_views(reps, result.backbone, config.strategy, &sampler, mode);
      Tensor loss = contrastive_loss(config.loss, views, config.loss_config, &diag);
      const double value = loss.item();
      if (!std::isfinite(value))
        throw Error("non-finite pretraining loss at epoch " + std::to_string(epoch) + ", step " +
                    std::to_string(result.step_losses.size() + 1));
      optimizer.zero_grad();
      loss.backward();
      optimizer.step();
      result.step_losses.push_back(value);
      weighted += value * double(idx.size());
    }

    double val_loss = kNaN;
    if (val.num_windows > 0) {
      NoGradGuard guard;
      // Same partitions every epoch so validation losses are comparable.
      PartitionSampler val_sampler(derive_seed(config.seed, std::uint64_t(SeedStream::ValidationPartition)));
      double total = 0;
      for (std::size_t start = 0; start < val.num_windows; start += config.batch_size) {
        const auto idx = iota_indices(std::min(config.batch_size, val.num_windows - start), start);
        auto reps = encode_channels(batch_tensor(val, idx), result.backbone.encoder, ForwardMode::eval());
        const ViewSet views = build_views(reps, result.backbone, config.strategy, &val_sampler, ForwardMode::eval());
        total += contrastive_loss(config.loss, views, config.loss_config).item() * double(idx.size());
      }
      val_loss = total / double(val.num_windows);
    }

    PretrainEpochLog log;
    log.epoch = epoch;
    log.train_loss = weighted / double(train.num_windows);
    log.val_loss = val_loss;
    log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.epochs.push_back(log);
    if (progress) progress(log);
  }

  result.clamped_exponents = diag.clamped_exponents;
  result.checkpoint = make_checkpoint(named, to_json(config), config.seed);
  return result;
}

PretrainingLabels pretraining_labels(const ModelCheckpoint* checkpoint) {
  if (!checkpoint) return {};
  const PretrainConfig cfg = parse_pretrain_config(checkpoint->config_json);
  return {to_string(cfg.loss), to_string(cfg.strategy)};
}

FinetuneResult finetune(const FinetuneConfig& config, const ModelCheckpoint* checkpoint,
                        const WindowedDataset& labeled, const WindowedDataset& val, const WindowedDataset& test,
                        const FinetuneHooks& hooks) {
  config.validate();
  if (checkpoint && config.from_scratch) throw ConfigError("from_scratch fine-tuning cannot take a checkpoint");
  if (!checkpoint && !config.from_scratch) throw ConfigError("fine-tuning needs a checkpoint unless from_scratch");
  for (const auto* ds : {&labeled, &val, &test}) {
    ds->validate();
    if (!ds->has_labels) throw ConfigError("fine-tuning datasets must carry labels");
  }
  if (test.num_windows == 0) throw ConfigError("test set is empty");
  check_compatible(labeled, val, "validation set");
  check_compatible(labeled, test, "test set");
  if (labeled.num_classes < 2) throw ConfigError("fine-tuning needs at least 2 classes");

  FinetuneResult result;
  result.head = config.head;
  const auto labels = pretraining_labels(checkpoint);
  result.pretraining = labels.loss;
  result.strategy = labels.strategy;

  Rng init_rng = stream_rng(config.seed, SeedStream::Init);
  if (checkpoint) {
    result.backbone = backbone_from_checkpoint(*checkpoint, config.dropout);
  } else {
    EncoderConfig enc = config.encoder;
    enc.dropout = config.dropout;
    result.backbone = init_backbone(enc, std::nullopt, init_rng);
  }
  const EncoderConfig& enc = result.backbone.encoder.config;
  const std::size_t t_out = encoder_output_len(labeled.window_length, enc);
  if (t_out < kPooledSteps)
    throw ConfigError("window length " + std::to_string(labeled.window_length) + " gives " + std::to_string(t_out) +
                      " representation steps; the classifier needs at least " + std::to_string(kPooledSteps));
  if (config.head == HeadType::Mpnn && !result.backbone.mpnn)
    result.backbone.mpnn = MpnnParams::init(mpnn_config_for(enc, config.mpnn_rounds, config.dropout), init_rng);
  if (config.head == HeadType::LinearCombiner) result.backbone.mpnn.reset();

  Rng sampling_rng = stream_rng(config.seed, SeedStream::Sampling);
  const WindowedDataset train_set = sample_balanced(labeled, config.samples_per_class, sampling_rng);
  const WindowedDataset val_set = sample_balanced(val, config.samples_per_class, sampling_rng);

  Rng head_rng = stream_rng(config.seed, SeedStream::Head);
  result.classifier = ClassifierParams::init(enc.output_channels, labeled.num_classes, head_rng);
  if (config.head == HeadType::LinearCombiner) result.combiner = init_combiner(labeled.num_channels, head_rng);

  const bool probe = config.mode == FinetuneMode::Probe;
  ParameterList trainable;
  result.classifier.layer.append_parameters("classifier", trainable);
  if (result.combiner.defined()) trainable.push_back({"combiner.weight", result.combiner});
  if (!probe) {
    auto bb = result.backbone.named_parameters();
    trainable.insert(trainable.end(), bb.begin(), bb.end());
  }
  std::vector<Tensor> params = tensors_of(trainable);
  AdamWOptions opts;
  opts.lr = config.lr;
  opts.weight_decay = config.weight_decay;
  AdamW optimizer(params, opts);

  const HeadModel model{result.backbone, config.head, result.classifier, result.combiner};
  std::vector<Tensor> train_features, val_features;
  if (probe) {
    train_features = model.frozen_features(train_set);
    val_features = model.frozen_features(val_set);
  }
  const auto train_labels = train_set.label_vector();
  const auto val_labels = val_set.label_vector();

  Rng shuffle_rng = stream_rng(config.seed, SeedStream::Shuffle);
  Rng dropout_rng = stream_rng(config.seed, SeedStream::Dropout);
  std::vector<std::size_t> order = iota_indices(train_set.num_windows);
  double best = std::numeric_limits<double>::infinity();
  auto best_params = snapshot(params);
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double weighted = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(config.batch_size, order.size() - start));
      std::vector<std::size_t> y;
      for (auto i : idx) y.push_back(train_labels[i]);
      Tensor z = probe ? model.from_frozen(train_features, idx)
                       : model.represent(batch_tensor(train_set, idx), ForwardMode::training(dropout_rng));
      Tensor loss = cross_entropy(classify_logits(z, result.classifier), y);
      const double value = loss.item();
      if (!std::isfinite(value)) throw Error("non-finite fine-tuning loss at epoch " + std::to_string(epoch));
      optimizer.zero_grad();
      loss.backward();
      optimizer.step();
      weighted += value * double(idx.size());
    }
    result.train_losses.push_back(weighted / double(train_set.num_windows));

    double val_loss = 0;
    {
      NoGradGuard guard;
      for (std::size_t start = 0; start < val_set.num_windows; start += kEvalChunk) {
        const auto idx = iota_indices(std::min(kEvalChunk, val_set.num_windows - start), start);
        std::vector<std::size_t> y;
        for (auto i : idx) y.push_back(val_labels[i]);
        Tensor z = probe ? model.from_frozen(val_features, idx)
                         : model.represent(batch_tensor(val_set, idx), ForwardMode::eval());
        val_loss += cross_entropy(classify_logits(z, result.classifier), y).item() * double(idx.size());
      }
      val_loss /= double(val_set.num_windows);
    }
    if (hooks.validation_loss) val_loss = hooks.validation_loss(epoch, val_loss);
    result.val_losses.push_back(val_loss);
    result.epochs_run = epoch;

    if (val_loss < best) {
      best = val_loss;
      result.best_epoch = epoch;
      best_params = snapshot(params);
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  restore(params, best_params);

  const Tensor scores = predict(result, test);
  result.balanced_accuracy = balanced_accuracy(argmax_rows(scores), test.label_vector(), test.num_classes);
  return result;
}

Tensor predict(const FinetuneResult& result, const WindowedDataset& ds) {
  NoGradGuard guard;
  const HeadModel model{result.backbone, result.head, result.classifier, result.combiner};
  std::vector<Tensor> parts;
  for (std::size_t start = 0; start < ds.num_windows; start += kEvalChunk) {
    const auto idx = iota_indices(std::min(kEvalChunk, ds.num_windows - start), start);
    parts.push_back(classify(model.represent(batch_tensor(ds, idx), ForwardMode::eval()), result.classifier));
  }
  if (parts.empty()) return Tensor::zeros({0, result.classifier.num_classes()});
  return concat_rows(std::move(parts));
}

std::string metrics_csv_header() { return "mode,loss,strategy,head,n_per_class,seed,balanced_accuracy"; }

std::string metrics_csv_row(const FinetuneConfig& config, const std::string& pretraining, const std::string& strategy,
                            double balanced_accuracy) {
  std::ostringstream os;
  os << to_string(config.mode) << ',' << pretraining << ',' << strategy << ',' << to_string(config.head) << ','
     << config.samples_per_class << ',' << config.seed << ',' << format_double(balanced_accuracy);
  return os.str();
}

std::vector<FinetuneConfig> sweep_grid(const SweepConfig& config, bool have_checkpoint) {
  config.validate();
  std::vector<FinetuneConfig> grid;
  std::vector<bool> sources;
  if (config.include_scratch) sources.push_back(true);
  if (config.include_pretrained && have_checkpoint) sources.push_back(false);
  for (auto head : config.heads)
    for (bool scratch : sources)
      for (auto mode : config.modes)
        for (auto n : config.samples_per_class) {
          FinetuneConfig c = config.finetune;
          c.head = head;
          c.from_scratch = scratch;
          c.mode = mode;
          c.samples_per_class = n;
          grid.push_back(c);
        }
  return grid;
}

SweepTable sweep(std::span<const FinetuneConfig> grid, std::span<const std::uint64_t> seeds,
                 const ModelCheckpoint* checkpoint, const WindowedDataset& labeled, const WindowedDataset& val,
                 const WindowedDataset& test, std::size_t threads,
                 const std::function<void(const SweepRun&)>& progress) {
  SweepTable table;
  const PretrainingLabels pretrained = pretraining_labels(checkpoint);
  for (const auto& cell : grid)
    for (auto seed : seeds) {
      SweepRun run;
      run.config = cell;
      run.config.seed = seed;
      const PretrainingLabels labels = cell.from_scratch ? PretrainingLabels{} : pretrained;
      run.pretraining = labels.loss;
      run.strategy = labels.strategy;
      table.runs.push_back(std::move(run));
    }

  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < table.runs.size();) {
      SweepRun& run = table.runs[i];
      try {
        const ModelCheckpoint* ckpt = run.config.from_scratch ? nullptr : checkpoint;
        run.balanced_accuracy = finetune(run.config, ckpt, labeled, val, test).balanced_accuracy;
      } catch (const std::exception& e) {
        run.failed = true;
        run.balanced_accuracy = kNaN;
        run.error = e.what();
      }
      if (progress) {
        std::lock_guard lock(report);
        progress(run);
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, table.runs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& cell : grid)
    if (std::ranges::find(table.columns, cell.samples_per_class) == table.columns.end())
      table.columns.push_back(cell.samples_per_class);
  std::ranges::sort(table.columns);

  // Sums accumulate in run order so the means can be recomputed from the raw CSV.
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> row_of;
  std::vector<std::vector<double>> sums, counts;
  for (const auto& run : table.runs) {
    auto key = std::make_tuple(std::string(to_string(run.config.head)), run.pretraining,
                               std::string(to_string(run.config.mode)));
    auto [it, inserted] = row_of.try_emplace(key, table.rows.size());
    if (inserted) {
      table.rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), {}, 0});
      sums.emplace_back(table.columns.size(), 0.0);
      counts.emplace_back(table.columns.size(), 0.0);
    }
    const std::size_t r = it->second;
    const std::size_t col = std::size_t(std::ranges::find(table.columns, run.config.samples_per_class) -
                                        table.columns.begin());
    if (run.failed) {
      ++table.rows[r].failures;
      continue;
    }
    sums[r][col] += run.balanced_accuracy;
    counts[r][col] += 1;
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (std::size_t col = 0; col < table.columns.size(); ++col)
      table.rows[r].means.push_back(counts[r][col] > 0 ? sums[r][col] / counts[r][col] : kNaN);
  return table;
}

std::string sweep_runs_csv(const SweepTable& table) {
  std::ostringstream os;
  os << metrics_csv_header() << '\n';
  for (const auto& run : table.runs)
    os << metrics_csv_row(run.config, run.pretraining, run.strategy, run.balanced_accuracy) << '\n';
  return os.str();
}

std::string sweep_aggregate_csv(const SweepTable& table) {
  std::ostringstream os;
  os << "model,pretraining,mode";
  for (auto n : table.columns) os << ",n" << n;
  os << ",failures\n";
  for (const auto& row : table.rows) {
    os << row.model << ',' << row.pretraining << ',' << row.mode;
    for (double m : row.means) os << ',' << format_double(m);
    os << ',' << row.failures << '\n';
  }
  return os.str();
}

std::string sweep_svg(const SweepTable& table) {
  constexpr double width = 640, height = 400, left = 60, right = 200, top = 30, bottom = 50;
  constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                     "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  const std::size_t cols = table.columns.size();
  auto x_at = [&](std::size_t i) { return left + (cols > 1 ? plot_w * double(i) / double(cols - 1) : plot_w / 2); };
  auto y_at = [&](double acc) { return top + plot_h * (1.0 - acc); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
     << top + plot_h << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
     << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double acc = tick / 4.0;
    os << "<text x=\"" << left - 8 << "\" y=\"" << y_at(acc) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
       << acc << "</text>\n";
  }
  for (std::size_t i = 0; i < cols; ++i)
    os << "<text x=\"" << x_at(i) << "\" y=\"" << top + plot_h + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
       << table.columns[i] << "</text>\n";
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
     << "\" font-size=\"12\" text-anchor=\"middle\">samples per class</text>\n"
     << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << top + plot_h / 2 << ")\">balanced accuracy</text>\n";

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const char* color = palette[r % std::size(palette)];
    const std::string label = row.model + " / " + row.pretraining + " / " + row.mode;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < cols; ++i) {
      if (std::isnan(row.means[i])) continue;
      os << (first ? "" : " ") << x_at(i) << ',' << y_at(row.means[i]);
      first = false;
    }
    os << "\"><title>" << label << "</title></polyline>\n";
    const double ly = top + 14.0 * double(r);
    os << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + plot_w + 30 << "\" y2=\""
       << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << left + plot_w + 34 << "\" y=\"" << ly + 4 << "\" font-size=\"10\">" << label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mvts
