#include "mvts/config.hpp"

#include <json.hpp>
#include <set>
#include <type_traits>

#include "mvts/error.hpp"

namespace mvts {

using nlohmann::json;

namespace {

// Reads members of one JSON object, tracking which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(context_ + " must be a JSON object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_unsigned()) throw ConfigError(context_ + "." + key + " must be a non-negative integer");
    }
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(context_ + "." + key + ": " + e.what());
    }
  }

  template <class T, class Parse>
  void get_enum(const char* key, T& out, Parse parse) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_string()) throw ConfigError(context_ + "." + key + " must be a string");
    out = parse(it->template get<std::string>());
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return context_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError("unknown key '" + key + "' in " + context_);
  }

 private:
  const json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

json encoder_json(const EncoderConfig& c) {
  return {{"hidden_channels", c.hidden_channels}, {"output_channels", c.output_channels},
          {"hidden_groups", c.hidden_groups},     {"output_groups", c.output_groups},
          {"widths", c.widths},                   {"padding", c.padding},
          {"dropout", c.dropout},                 {"norm_eps", c.norm_eps}};
}

EncoderConfig encoder_from(const json& j, const std::string& context) {
  EncoderConfig c;
  ObjectReader r(j, context);
  r.get("hidden_channels", c.hidden_channels);
  r.get("output_channels", c.output_channels);
  r.get("hidden_groups", c.hidden_groups);
  r.get("output_groups", c.output_groups);
  r.get("widths", c.widths);
  r.get("padding", c.padding);
  r.get("dropout", c.dropout);
  r.get("norm_eps", c.norm_eps);
  r.finish();
  c.validate();
  return c;
}

json pretrain_json(const PretrainConfig& c) {
  return {{"strategy", to_string(c.strategy)},
          {"loss", to_string(c.loss)},
          {"tau", c.loss_config.tau},
          {"lambda", c.loss_config.lambda},
          {"hierarchical", c.loss_config.hierarchical},
          {"epochs", c.epochs},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"batch_size", c.batch_size},
          {"dropout", c.dropout},
          {"seed", c.seed},
          {"mpnn_rounds", c.mpnn_rounds},
          {"encoder", encoder_json(c.encoder)}};
}

json finetune_json(const FinetuneConfig& c) {
  return {{"mode", to_string(c.mode)},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"samples_per_class", c.samples_per_class},
          {"seed", c.seed},
          {"head", to_string(c.head)},
          {"from_scratch", c.from_scratch},
          {"dropout", c.dropout},
          {"mpnn_rounds", c.mpnn_rounds},
          {"encoder", encoder_json(c.encoder)}};
}

FinetuneConfig finetune_from(const json& j, const std::string& context) {
  FinetuneConfig c;
  ObjectReader r(j, context);
  r.get_enum("mode", c.mode, parse_finetune_mode);
  r.get("lr", c.lr);
  r.get("weight_decay", c.weight_decay);
  r.get("batch_size", c.batch_size);
  r.get("max_epochs", c.max_epochs);
  r.get("patience", c.patience);
  r.get("samples_per_class", c.samples_per_class);
  r.get("seed", c.seed);
  r.get_enum("head", c.head, parse_head_type);
  r.get("from_scratch", c.from_scratch);
  r.get("dropout", c.dropout);
  r.get("mpnn_rounds", c.mpnn_rounds);
  if (const auto* e = r.child("encoder")) c.encoder = encoder_from(*e, r.path("encoder"));
  r.finish();
  c.validate();
  return c;
}

}  // namespace

std::string to_json(const EncoderConfig& config) { return encoder_json(config).dump(2); }

std::string to_json(const SynthConfig& c) {
  json bands = json::array();
  for (const auto& b : c.class_bands) bands.push_back({b[0], b[1]});
  json j = {{"num_channels", c.num_channels},
            {"num_classes", c.num_classes},
            {"windows_per_class", c.windows_per_class},
            {"sample_rate_hz", c.sample_rate_hz},
            {"window_seconds", c.window_seconds},
            {"num_latent_sources", c.num_latent_sources},
            {"noise_std", c.noise_std},
            {"interferers_per_channel", c.interferers_per_channel},
            {"interference_std", c.interference_std},
            {"seed", c.seed},
            {"class_bands", bands},
            {"mixing", c.mixing},
            {"mixing_seed", c.mixing_seed},
            {"channel_names", c.channel_names},
            {"split_ratios", c.split_ratios},
            {"standardize", c.standardize}};
  return j.dump(2);
}

std::string to_json(const PretrainConfig& config) { return pretrain_json(config).dump(2); }

std::string to_json(const FinetuneConfig& config) { return finetune_json(config).dump(2); }

std::string to_json(const SweepConfig& c) {
  json modes = json::array();
  for (auto m : c.modes) modes.push_back(to_string(m));
  json heads = json::array();
  for (auto h : c.heads) heads.push_back(to_string(h));
  json j = {{"samples_per_class", c.samples_per_class},
            {"seeds", c.seeds},
            {"modes", modes},
            {"heads", heads},
            {"include_scratch", c.include_scratch},
            {"include_pretrained", c.include_pretrained},
            {"finetune", finetune_json(c.finetune)}};
  return j.dump(2);
}

SynthConfig parse_synth_config(std::string_view text) {
  const json j = parse_document(text);
  SynthConfig c;
  ObjectReader r(j, "synth config");
  r.get("num_channels", c.num_channels);
  r.get("num_classes", c.num_classes);
  r.get("windows_per_class", c.windows_per_class);
  r.get("sample_rate_hz", c.sample_rate_hz);
  r.get("window_seconds", c.window_seconds);
  r.get("num_latent_sources", c.num_latent_sources);
  r.get("noise_std", c.noise_std);
  r.get("interferers_per_channel", c.interferers_per_channel);
  r.get("interference_std", c.interference_std);
  r.get("seed", c.seed);
  r.get("class_bands", c.class_bands);
  r.get("mixing", c.mixing);
  r.get("mixing_seed", c.mixing_seed);
  r.get("channel_names", c.channel_names);
  r.get("split_ratios", c.split_ratios);
  r.get("standardize", c.standardize);
  r.finish();
  c.validate();
  return c;
}

PretrainConfig parse_pretrain_config(std::string_view text) {
  const json j = parse_document(text);
  PretrainConfig c;
  ObjectReader r(j, "pretrain config");
  r.get_enum("strategy", c.strategy, parse_view_strategy);
  r.get_enum("loss", c.loss, parse_loss_kind);
  r.get("tau", c.loss_config.tau);
  r.get("lambda", c.loss_config.lambda);
  r.get("hierarchical", c.loss_config.hierarchical);
  r.get("epochs", c.epochs);
  r.get("lr", c.lr);
  r.get("weight_decay", c.weight_decay);
  r.get("batch_size", c.batch_size);
  r.get("dropout", c.dropout);
  r.get("seed", c.seed);
  r.get("mpnn_rounds", c.mpnn_rounds);
  if (const auto* e = r.child("encoder")) c.encoder = encoder_from(*e, r.path("encoder"));
  r.finish();
  c.validate();
  return c;
}

FinetuneConfig parse_finetune_config(std::string_view text) {
  return finetune_from(parse_document(text), "finetune config");
}

SweepConfig parse_sweep_config(std::string_view text) {
  const json j = parse_document(text);
  SweepConfig c;
  ObjectReader r(j, "sweep config");
  r.get("samples_per_class", c.samples_per_class);
  r.get("seeds", c.seeds);
  if (const auto* modes = r.child("modes")) {
    if (!modes->is_array()) throw ConfigError("sweep config.modes must be an array");
    c.modes.clear();
    for (const auto& m : *modes) {
      if (!m.is_string()) throw ConfigError("sweep config.modes entries must be strings");
      c.modes.push_back(parse_finetune_mode(m.get<std::string>()));
    }
  }
  if (const auto* heads = r.child("heads")) {
    if (!heads->is_array()) throw ConfigError("sweep config.heads must be an array");
    c.heads.clear();
    for (const auto& h : *heads) {
      if (!h.is_string()) throw ConfigError("sweep config.heads entries must be strings");
      c.heads.push_back(parse_head_type(h.get<std::string>()));
    }
  }
  r.get("include_scratch", c.include_scratch);
  r.get("include_pretrained", c.include_pretrained);
  if (const auto* f = r.child("finetune")) c.finetune = finetune_from(*f, r.path("finetune"));
  r.finish();
  c.validate();
  return c;
}

}  // namespace mvts
