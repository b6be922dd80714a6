#include "mvts/mpnn.hpp"

#include "mvts/error.hpp"
#include "mvts/ops.hpp"

namespace mvts {

void MpnnConfig::validate() const {
  if (dim == 0 || readout_hidden == 0) throw ConfigError("mpnn dimensions must be >= 1");
  if (rounds == 0) throw ConfigError("mpnn needs at least one message round");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("mpnn dropout must lie in [0, 1)");
}

MpnnParams MpnnParams::init(const MpnnConfig& config, Rng& rng) {
  config.validate();
  MpnnParams p;
  p.config = config;
  for (std::size_t k = 0; k < config.rounds; ++k) p.message.push_back(LinearLayer::init(2 * config.dim, config.dim, rng));
  p.readout_hidden = LinearLayer::init(config.dim, config.readout_hidden, rng);
  p.readout_output = LinearLayer::init(config.readout_hidden, config.dim, rng);
  return p;
}

ParameterList MpnnParams::named_parameters() const {
  ParameterList out;
  for (std::size_t k = 0; k < message.size(); ++k) message[k].append_parameters("mpnn.message" + std::to_string(k), out);
  readout_hidden.append_parameters("mpnn.readout0", out);
  readout_output.append_parameters("mpnn.readout1", out);
  return out;
}

namespace {

void check_states(const std::vector<Tensor>& states, std::size_t min_vertices, const char* op) {
  if (states.size() < min_vertices)
    throw UsageError(std::string(op) + " needs at least " + std::to_string(min_vertices) + " vertices, got " +
                     std::to_string(states.size()));
  for (const auto& s : states) {
    if (s.rank() != 3) throw DimensionError(std::string(op) + ": vertex state must be [N, L, T]");
    if (s.shape() != states[0].shape()) throw DimensionError(std::string(op) + ": vertex states differ in shape");
  }
}

Tensor vertex_mean(const std::vector<Tensor>& states) {
  return scale(add_n(states), 1.0 / double(states.size()));
}

}  // namespace

NodeStateSet message_round(const NodeStateSet& in, const LinearLayer& message, ForwardMode mode, double dropout_rate) {
  check_states(in.states, 2, "message_round");
  const std::size_t count = in.states.size();
  // Time-major copies so the linear layer acts on the feature axis.
  std::vector<Tensor> time_major;
  time_major.reserve(count);
  for (const auto& s : in.states) time_major.push_back(transpose(s, 1, 2));

  NodeStateSet out;
  out.round = in.round + 1;
  for (std::size_t v = 0; v < count; ++v) {
    std::vector<Tensor> messages;
    messages.reserve(count - 1);
    for (std::size_t u = 0; u < count; ++u) {
      if (u == v) continue;
      const Tensor pair[] = {time_major[v], time_major[u]};
      Tensor m = message(concat(pair, 2));
      m = relu(dropout(m, dropout_rate, mode.train, mode.rng));
      messages.push_back(m);
    }
    const Tensor m = scale(add_n(messages), 1.0 / double(count - 1));
    out.states.push_back(add(in.states[v], transpose(m, 1, 2)));
  }
  return out;
}

Tensor readout(const NodeStateSet& states, const MpnnParams& params, ForwardMode mode) {
  check_states(states.states, 1, "readout");
  Tensor h = transpose(vertex_mean(states.states), 1, 2);
  h = params.readout_hidden(h);
  h = relu(dropout(h, params.config.dropout, mode.train, mode.rng));
  h = params.readout_output(h);
  return transpose(h, 1, 2);
}

Tensor aggregate(std::span<const ChannelRepresentation> group, const MpnnParams& params, ForwardMode mode) {
  if (group.empty()) throw UsageError("aggregate: empty group");
  NodeStateSet states;
  for (const auto& r : group) states.states.push_back(r.values);
  check_states(states.states, 1, "aggregate");
  if (states.states[0].size(1) != params.config.dim)
    throw DimensionError("aggregate: representation width " + std::to_string(states.states[0].size(1)) +
                         " does not match mpnn dim " + std::to_string(params.config.dim));
  if (states.states.size() >= 2)
    for (const auto& m : params.message) states = message_round(states, m, mode, params.config.dropout);
  return readout(states, params, mode);
}

}  // namespace mvts
