#pragma once

#include <cstddef>
#include <vector>

#include "mvts/layers.hpp"
#include "mvts/tensor.hpp"

namespace mvts {

// Shared single-channel convolutional encoder.
//
// Six blocks of conv -> dropout -> group norm -> GELU with widths 3,2,2,2,2,2
// (stride equal to width, padding 1), followed by a width-1 readout conv to
// `output_channels` with dropout and group norm. With the defaults a 3000
// sample window maps to a 64 x 33 representation.
struct EncoderConfig {
  std::size_t hidden_channels = 256;
  std::size_t output_channels = 64;
  std::size_t hidden_groups = 128;
  std::size_t output_groups = 32;
  std::vector<std::size_t> widths{3, 2, 2, 2, 2, 2};
  std::size_t padding = 1;
  double dropout = 0.1;
  double norm_eps = 1e-5;

  void validate() const;
};

struct ConvBlock {
  Tensor kernel;  // [out, in, width]
  Tensor gamma;   // [out]
  Tensor beta;    // [out]
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t groups = 1;
};

struct EncoderParams {
  EncoderConfig config;
  std::vector<ConvBlock> blocks;
  ConvBlock readout;

  static EncoderParams init(const EncoderConfig& config, Rng& rng);
  ParameterList named_parameters() const;
};

struct ChannelRepresentation {
  Tensor values;  // [N, L, T_out]
  std::size_t source_channel = 0;
};

// Representation length after all layers; throws ConfigError naming the first
// layer that would produce an empty output.
std::size_t encoder_output_len(std::size_t t_in, const EncoderConfig& config = {});

// x: [N, 1, T_in].
ChannelRepresentation encode(const Tensor& x, const EncoderParams& params, ForwardMode mode,
                             std::size_t source_channel = 0);

// Applies `encode` to every channel of X: [N, C, T_in] with the same weights.
std::vector<ChannelRepresentation> encode_channels(const Tensor& x, const EncoderParams& params, ForwardMode mode);

}  // namespace mvts
