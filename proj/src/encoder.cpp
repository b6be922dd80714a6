#include "mvts/encoder.hpp"

#include "mvts/error.hpp"
#include "mvts/ops.hpp"

namespace mvts {

void EncoderConfig::validate() const {
  if (widths.empty()) throw ConfigError("encoder needs at least one convolutional block");
  for (auto w : widths)
    if (w == 0) throw ConfigError("encoder kernel widths must be >= 1");
  if (hidden_channels == 0 || output_channels == 0) throw ConfigError("encoder channel counts must be >= 1");
  if (hidden_groups == 0 || hidden_channels % hidden_groups != 0)
    throw ConfigError("encoder hidden_groups must divide hidden_channels");
  if (output_groups == 0 || output_channels % output_groups != 0)
    throw ConfigError("encoder output_groups must divide output_channels");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder dropout must lie in [0, 1)");
  if (!(norm_eps > 0.0)) throw ConfigError("encoder norm_eps must be positive");
}

std::size_t encoder_output_len(std::size_t t_in, const EncoderConfig& config) {
  std::size_t t = t_in;
  for (std::size_t i = 0; i < config.widths.size(); ++i) {
    const std::size_t k = config.widths[i];
    if (t + 2 * config.padding < k || t == 0)
      throw ConfigError("input length " + std::to_string(t_in) + " too short: encoder block " + std::to_string(i) +
                        " (width " + std::to_string(k) + ") receives length " + std::to_string(t));
    t = (t + 2 * config.padding - k) / k + 1;
  }
  if (t == 0) throw ConfigError("input length " + std::to_string(t_in) + " too short for the encoder readout");
  return t;  // the width-1 readout preserves length
}

EncoderParams EncoderParams::init(const EncoderConfig& config, Rng& rng) {
  config.validate();
  EncoderParams p;
  p.config = config;
  std::size_t in = 1;
  for (auto w : config.widths) {
    const std::size_t out = config.hidden_channels;
    p.blocks.push_back({init_fan_in_uniform({out, in, w}, in * w, rng), Tensor::full({out}, 1.0, true),
                        Tensor::zeros({out}, true), w, config.padding, config.hidden_groups});
    in = out;
  }
  const std::size_t out = config.output_channels;
  p.readout = {init_fan_in_uniform({out, in, 1}, in, rng), Tensor::full({out}, 1.0, true), Tensor::zeros({out}, true),
               1, 0, config.output_groups};
  return p;
}

ParameterList EncoderParams::named_parameters() const {
  ParameterList out;
  auto add = [&out](const std::string& prefix, const ConvBlock& b) {
    out.push_back({prefix + ".kernel", b.kernel});
    out.push_back({prefix + ".gamma", b.gamma});
    out.push_back({prefix + ".beta", b.beta});
  };
  for (std::size_t i = 0; i < blocks.size(); ++i) add("encoder.block" + std::to_string(i), blocks[i]);
  add("encoder.readout", readout);
  return out;
}

ChannelRepresentation encode(const Tensor& x, const EncoderParams& params, ForwardMode mode,
                             std::size_t source_channel) {
  if (x.rank() != 3 || x.size(1) != 1)
    throw UsageError("encode expects a single-channel batch [N, 1, T], got " + shape_string(x.shape()) +
                     "; split channels with encode_channels");
  encoder_output_len(x.size(2), params.config);
  const auto& cfg = params.config;
  Tensor h = x;
  for (const auto& b : params.blocks) {
    h = conv1d(h, b.kernel, b.stride, b.padding);
    h = dropout(h, cfg.dropout, mode.train, mode.rng);
    h = group_norm(h, b.groups, b.gamma, b.beta, cfg.norm_eps);
    h = gelu(h);
  }
  const auto& r = params.readout;
  h = conv1d(h, r.kernel, r.stride, r.padding);
  h = dropout(h, cfg.dropout, mode.train, mode.rng);
  h = group_norm(h, r.groups, r.gamma, r.beta, cfg.norm_eps);
  return {h, source_channel};
}

std::vector<ChannelRepresentation> encode_channels(const Tensor& x, const EncoderParams& params, ForwardMode mode) {
  if (x.rank() != 3 || x.size(1) == 0)
    throw UsageError("encode_channels expects [N, C, T] with C >= 1, got " + shape_string(x.shape()));
  std::vector<ChannelRepresentation> reps;
  reps.reserve(x.size(1));
  for (std::size_t c = 0; c < x.size(1); ++c) reps.push_back(encode(slice(x, 1, c, 1), params, mode, c));
  return reps;
}

}  // namespace mvts
