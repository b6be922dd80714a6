#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mvts/encoder.hpp"
#include "mvts/layers.hpp"

namespace mvts {

enum class HeadType { Mpnn, LinearCombiner };

const char* to_string(HeadType h);
HeadType parse_head_type(const std::string& name);

inline constexpr std::size_t kPooledSteps = 4;

// Average pool to 4 steps, flatten to 4 * L features, one linear layer.
struct ClassifierParams {
  LinearLayer layer;  // [4 * L, classes]

  static ClassifierParams init(std::size_t feature_dim, std::size_t num_classes, Rng& rng);
  std::size_t num_classes() const { return layer.weight.size(1); }
};

// Weighted sum of C_d channel representations; weights is [C_d, 1].
Tensor combine_linear(std::span<const ChannelRepresentation> reps, const Tensor& weights);
Tensor init_combiner(std::size_t channels, Rng& rng);

// z: [N, L, T_out] with T_out >= 4.
Tensor classify_logits(const Tensor& z, const ClassifierParams& params);
// Row-wise class probabilities.
Tensor classify(const Tensor& z, const ClassifierParams& params);

std::vector<std::size_t> argmax_rows(const Tensor& scores);

// Mean per-class recall over classes present in `labels`.
double balanced_accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels,
                         std::size_t num_classes);

}  // namespace mvts
