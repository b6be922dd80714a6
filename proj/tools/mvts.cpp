// mvts command-line tool.
//
// Exit codes: 0 success, 1 runtime or tolerance failure, 2 config or usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "mvts/config.hpp"
#include "mvts/error.hpp"
#include "mvts/gradcheck.hpp"
#include "mvts/harness.hpp"

namespace fs = std::filesystem;
using namespace mvts;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr std::uint64_t kSplitStream = 0x5B117;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
}

std::string config_text(const std::string& path) { return path.empty() ? std::string("{}") : read_text(path); }

void echo(const std::string& json, const fs::path& path) {
  std::cout << json << std::endl;
  write_text(path, json + "\n");
}

std::size_t sweep_threads() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MVTS_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) throw ConfigError("MVTS_THREADS must be a positive integer");
    n = std::min<std::size_t>(n, v);
  }
  return n;
}

struct SynthArgs {
  std::string config;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  const SynthConfig cfg = parse_synth_config(config_text(a.config));
  ensure_dir(a.out);
  echo(to_json(cfg), fs::path(a.out) / "config.json");
  const WindowedDataset ds = generate_synthetic(cfg);
  Rng rng = make_rng(cfg.seed, kSplitStream);
  const auto splits = split_dataset(ds, cfg.split_ratios, rng);
  const char* names[] = {"train.cts", "val.cts", "test.cts"};
  for (int i = 0; i < 3; ++i) {
    write_cts(splits[i], fs::path(a.out) / names[i]);
    std::cout << names[i] << ": " << splits[i].num_windows << " windows\n";
  }
  return 0;
}

struct PretrainArgs {
  std::string config, train, val, out, log;
};

int cmd_pretrain(const PretrainArgs& a) {
  const PretrainConfig cfg = parse_pretrain_config(config_text(a.config));
  const fs::path out(a.out);
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  ensure_dir(dir);
  fs::path config_path = out, log_path = a.log.empty() ? out : fs::path(a.log);
  config_path.replace_extension(".config.json");
  if (a.log.empty()) log_path.replace_extension(".log.csv");
  echo(to_json(cfg), config_path);

  const WindowedDataset train = read_cts(a.train);
  const WindowedDataset val = a.val.empty() ? WindowedDataset{} : read_cts(a.val);
  std::ofstream log(log_path);
  if (!log) throw Error("cannot write " + log_path.string());
  log << "epoch,train_loss,val_loss,wall_seconds\n";
  auto result = pretrain(cfg, train, val, [&](const PretrainEpochLog& e) {
    char line[160];
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.3f", e.epoch, e.train_loss, e.val_loss, e.wall_seconds);
    log << line << '\n' << std::flush;
    std::cout << "epoch " << line << std::endl;
  });
  save_checkpoint(result.checkpoint, out);
  if (result.clamped_exponents > 0)
    std::cerr << "warning: " << result.clamped_exponents << " COCOA exponents were clamped\n";
  std::cout << "checkpoint: " << out.string() << '\n';
  return 0;
}

struct DataArgs {
  std::string train, val, test;
};

struct FinetuneArgs {
  std::string config, checkpoint, out;
  bool scratch = false;
  DataArgs data;
};

int cmd_finetune(const FinetuneArgs& a) {
  FinetuneConfig cfg = parse_finetune_config(config_text(a.config));
  if (a.scratch == !a.checkpoint.empty()) throw UsageError("pass exactly one of --checkpoint and --scratch");
  cfg.from_scratch = a.scratch;
  ensure_dir(a.out);
  echo(to_json(cfg), fs::path(a.out) / "config.json");

  std::optional<ModelCheckpoint> ckpt;
  if (!a.scratch) ckpt = load_checkpoint(a.checkpoint);
  const auto labeled = read_cts(a.data.train), val = read_cts(a.data.val), test = read_cts(a.data.test);
  const auto result = finetune(cfg, ckpt ? &*ckpt : nullptr, labeled, val, test);
  const std::string row = metrics_csv_row(cfg, result.pretraining, result.strategy, result.balanced_accuracy);
  write_text(fs::path(a.out) / "metrics.csv", metrics_csv_header() + "\n" + row + "\n");
  std::cout << metrics_csv_header() << '\n' << row << '\n'
            << "epochs run: " << result.epochs_run << ", best epoch: " << result.best_epoch << '\n';
  return 0;
}

struct SweepArgs {
  std::string config, checkpoint, out;
  DataArgs data;
};

int cmd_sweep(const SweepArgs& a) {
  const SweepConfig cfg = parse_sweep_config(config_text(a.config));
  const std::size_t threads = sweep_threads();
  ensure_dir(a.out);
  echo(to_json(cfg), fs::path(a.out) / "config.json");

  std::optional<ModelCheckpoint> ckpt;
  if (!a.checkpoint.empty()) ckpt = load_checkpoint(a.checkpoint);
  if (cfg.include_pretrained && !ckpt) throw UsageError("sweep with pretrained runs needs --checkpoint");
  const auto labeled = read_cts(a.data.train), val = read_cts(a.data.val), test = read_cts(a.data.test);
  const auto grid = sweep_grid(cfg, ckpt.has_value());
  const auto table = sweep(grid, cfg.seeds, ckpt ? &*ckpt : nullptr, labeled, val, test, threads,
                           [](const SweepRun& r) {
                             std::cout << metrics_csv_row(r.config, r.pretraining, r.strategy, r.balanced_accuracy);
                             if (r.failed) std::cout << "  FAILED: " << r.error;
                             std::cout << std::endl;
                           });
  write_text(fs::path(a.out) / "runs.csv", sweep_runs_csv(table));
  write_text(fs::path(a.out) / "aggregate.csv", sweep_aggregate_csv(table));
  write_text(fs::path(a.out) / "plot.svg", sweep_svg(table));
  std::cout << sweep_aggregate_csv(table);
  std::size_t failures = 0;
  for (const auto& row : table.rows) failures += row.failures;
  if (failures > 0) std::cerr << failures << " run(s) failed; see the failures column\n";
  return 0;
}

struct GradcheckArgs {
  GradcheckOptions options;
  std::size_t oracle_instances = 100;
  double oracle_tolerance = 1e-9;
  bool inject_bug = false;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  std::cout << "{\"instances\": " << a.options.instances << ", \"step\": " << a.options.step
            << ", \"tolerance\": " << a.options.tolerance << ", \"seed\": " << a.options.seed
            << ", \"oracle_instances\": " << a.oracle_instances << ", \"oracle_tolerance\": " << a.oracle_tolerance
            << ", \"inject_bug\": " << (a.inject_bug ? "true" : "false") << "}\n";
  auto cases = gradcheck_cases();
  if (a.inject_bug) cases.push_back(broken_gradcheck_case());
  bool ok = true;
  for (const auto& c : cases) {
    const auto r = run_gradcheck(c, a.options);
    ok = ok && r.passed;
    std::printf("%-4s gradient %-26s max_rel_err=%.3e instances=%zu%s%s\n", r.passed ? "ok" : "FAIL", r.name.c_str(),
                r.max_relative_error, r.instances, r.error.empty() ? "" : " error: ", r.error.c_str());
  }
  for (const auto& r : run_loss_oracles(a.oracle_instances, a.options.seed, a.oracle_tolerance)) {
    ok = ok && r.passed;
    std::printf("%-4s oracle   %-26s max_abs_err=%.3e instances=%zu\n", r.passed ? "ok" : "FAIL", r.name.c_str(),
                r.max_abs_error, r.instances);
  }
  std::printf("%s\n", ok ? "all checks passed" : "gradient check FAILED");
  return ok ? 0 : kExitRuntime;
}

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--train", d.train, "Labeled CTS file to sample training windows from")->required();
  cmd->add_option("--val", d.val, "Labeled CTS file to sample validation windows from")->required();
  cmd->add_option("--test", d.test, "Labeled CTS file for test balanced accuracy")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel-agnostic contrastive pretraining for multichannel time series"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic dataset and write train/val/test CTS splits");
  s->add_option("--config", synth.config, "SynthConfig JSON (defaults when omitted)");
  s->add_option("--out", synth.out, "Output directory")->required();

  PretrainArgs pre;
  auto* p = app.add_subcommand("pretrain", "Contrastive pretraining; writes a checkpoint and an epoch log");
  p->add_option("--config", pre.config, "PretrainConfig JSON");
  p->add_option("--train", pre.train, "Training CTS file")->required();
  p->add_option("--val", pre.val, "Validation CTS file");
  p->add_option("--out", pre.out, "Checkpoint path")->required();
  p->add_option("--log", pre.log, "Epoch log CSV (default: next to the checkpoint)");

  FinetuneArgs ft;
  auto* f = app.add_subcommand("finetune", "Fine-tune on a balanced subsample and report test balanced accuracy");
  f->add_option("--config", ft.config, "FinetuneConfig JSON");
  auto* ck = f->add_option("--checkpoint", ft.checkpoint, "Pretrained checkpoint");
  auto* sc = f->add_flag("--scratch", ft.scratch, "Start from freshly initialized weights");
  ck->excludes(sc);
  sc->excludes(ck);
  add_data_options(f, ft.data);
  f->add_option("--out", ft.out, "Run directory")->required();

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Grid over samples per class, seeds, scratch/pretrained and full/probe");
  w->add_option("--config", sw.config, "SweepConfig JSON");
  w->add_option("--checkpoint", sw.checkpoint, "Pretrained checkpoint for the pretrained rows");
  add_data_options(w, sw.data);
  w->add_option("--out", sw.out, "Output directory")->required();

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference gradient checks and loss oracle comparisons");
  g->add_option("--instances", gc.options.instances, "Random instances per op")->check(CLI::PositiveNumber);
  g->add_option("--tolerance", gc.options.tolerance, "Max relative gradient error")->check(CLI::PositiveNumber);
  g->add_option("--seed", gc.options.seed, "Seed for instance generation");
  g->add_option("--oracle-instances", gc.oracle_instances, "Random loss oracle instances");
  g->add_flag("--inject-bug", gc.inject_bug, "Register an op with a deliberately wrong gradient");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*p) return cmd_pretrain(pre);
    if (*f) return cmd_finetune(ft);
    if (*w) return cmd_sweep(sw);
    if (*g) return cmd_gradcheck(gc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
