#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mvts/encoder.hpp"
#include "mvts/layers.hpp"

namespace mvts {

// Message passing over a fully connected graph of channel representations.
//
// Round k: every vertex h receives the mean over h' != h of
// M_k(concat(h, h')), where M_k = ReLU(dropout(linear(2L -> L))) is applied
// independently at every time step, and updates to h + m. The readout applies
// linear -> dropout -> ReLU -> linear to the vertex mean of the final states.
struct MpnnConfig {
  std::size_t dim = 64;
  std::size_t rounds = 1;
  std::size_t readout_hidden = 64;
  double dropout = 0.1;

  void validate() const;
};

struct MpnnParams {
  MpnnConfig config;
  std::vector<LinearLayer> message;  // one per round, weight [2*dim, dim]
  LinearLayer readout_hidden;
  LinearLayer readout_output;

  static MpnnParams init(const MpnnConfig& config, Rng& rng);
  ParameterList named_parameters() const;
};

struct NodeStateSet {
  std::vector<Tensor> states;  // each [N, L, T]
  std::size_t round = 0;
};

// One synchronous round: all messages are computed from the incoming states.
NodeStateSet message_round(const NodeStateSet& states, const LinearLayer& message, ForwardMode mode,
                           double dropout_rate);

Tensor readout(const NodeStateSet& states, const MpnnParams& params, ForwardMode mode);

// K rounds then readout. A single-vertex group skips the message phase.
Tensor aggregate(std::span<const ChannelRepresentation> group, const MpnnParams& params, ForwardMode mode);

}  // namespace mvts
