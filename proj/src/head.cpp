#include "mvts/head.hpp"

#include "mvts/error.hpp"
#include "mvts/ops.hpp"

namespace mvts {

const char* to_string(HeadType h) { return h == HeadType::Mpnn ? "mpnn" : "linear_combiner"; }

HeadType parse_head_type(const std::string& name) {
  if (name == "mpnn") return HeadType::Mpnn;
  if (name == "linear_combiner") return HeadType::LinearCombiner;
  throw ConfigError("unknown head '" + name + "' (expected mpnn or linear_combiner)");
}

ClassifierParams ClassifierParams::init(std::size_t feature_dim, std::size_t num_classes, Rng& rng) {
  if (num_classes < 2) throw ConfigError("classifier needs at least 2 classes");
  return {LinearLayer::init(kPooledSteps * feature_dim, num_classes, rng)};
}

Tensor combine_linear(std::span<const ChannelRepresentation> reps, const Tensor& weights) {
  if (reps.empty()) throw UsageError("combine_linear: no channel representations");
  if (weights.shape() != Shape{reps.size(), 1})
    throw DimensionError("combine_linear: weights " + shape_string(weights.shape()) + " for " +
                         std::to_string(reps.size()) + " channels");
  const Shape rep_shape = reps[0].values.shape();
  const std::size_t m = reps[0].values.numel();
  std::vector<Tensor> rows;
  for (const auto& r : reps) {
    if (r.values.shape() != rep_shape) throw DimensionError("combine_linear: representations differ in shape");
    rows.push_back(reshape(r.values, {1, m}));
  }
  const Tensor stacked = concat(rows, 0);                           // [C, M]
  const Tensor mixed = matmul(transpose(weights, 0, 1), stacked);   // [1, M]
  return reshape(mixed, rep_shape);
}

Tensor init_combiner(std::size_t channels, Rng& rng) { return init_fan_in_uniform({channels, 1}, channels, rng); }

Tensor classify_logits(const Tensor& z, const ClassifierParams& params) {
  if (z.rank() != 3) throw DimensionError("classify expects [N, L, T], got " + shape_string(z.shape()));
  const std::size_t t = z.size(2);
  if (t < kPooledSteps)
    throw ConfigError("classification needs at least " + std::to_string(kPooledSteps) + " time steps, got " +
                      std::to_string(t));
  const auto bounds = adaptive_pool_bounds(t, kPooledSteps);
  const Tensor pooled = avgpool1d(z, bounds);
  const Tensor flat = reshape(pooled, {z.size(0), z.size(1) * kPooledSteps});
  return params.layer(flat);
}

Tensor classify(const Tensor& z, const ClassifierParams& params) { return softmax(classify_logits(z, params)); }

std::vector<std::size_t> argmax_rows(const Tensor& scores) {
  if (scores.rank() != 2) throw DimensionError("argmax_rows expects a 2-d tensor");
  const std::size_t rows = scores.size(0), cols = scores.size(1);
  std::vector<std::size_t> out(rows, 0);
  const auto x = scores.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 1; c < cols; ++c)
      if (x[r * cols + c] > x[r * cols + out[r]]) out[r] = c;
  return out;
}

double balanced_accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels,
                         std::size_t num_classes) {
  if (labels.empty()) throw UsageError("balanced_accuracy: empty input");
  if (predictions.size() != labels.size())
    throw DimensionError("balanced_accuracy: " + std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(labels.size()) + " labels");
  std::vector<std::size_t> support(num_classes, 0), hits(num_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw DataError("label " + std::to_string(labels[i]) + " out of range");
    ++support[labels[i]];
    if (predictions[i] == labels[i]) ++hits[labels[i]];
  }
  double total = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < num_classes; ++c)
    if (support[c] > 0) {
      total += double(hits[c]) / double(support[c]);
      ++present;
    }
  return total / double(present);
}

}  // namespace mvts
