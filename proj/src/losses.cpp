#include "mvts/losses.hpp"

#include <limits>
#include <vector>

#include "mvts/error.hpp"
#include "mvts/ops.hpp"

namespace mvts {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_views(std::span<const Tensor> views, const char* loss) {
  if (views.size() < 2)
    throw ConfigError(std::string(loss) + " needs at least 2 views, got " + std::to_string(views.size()));
  for (const auto& v : views)
    if (v.shape() != views[0].shape())
      throw DimensionError(std::string(loss) + ": views differ in shape " + shape_string(views[0].shape()) + " vs " +
                           shape_string(v.shape()));
}

Tensor flatten_samples(const Tensor& v) {
  if (v.rank() < 1) throw DimensionError("cannot flatten a scalar view");
  return reshape(v, {v.size(0), v.numel() / v.size(0)});
}

// Zero that stays attached to the graph of `anchor`.
Tensor zero_like_loss(const Tensor& anchor) { return scale(sum(anchor), 0.0); }

// Sum over batches b and rows i of logsumexp(neg/pos row) - positive, where the
// positive of row i is pos[b, i, i] and negatives are pos[b, i, :] together
// with same[b, i, j != i].
Tensor contrast_rows(const Tensor& pos_scores, const Tensor& same_scores) {
  const Tensor parts[] = {pos_scores, fill_diagonal(same_scores, kNegInf)};
  const Tensor logits = concat(parts, pos_scores.rank() - 1);
  return sum(sub(logsumexp(logits), diagonal(pos_scores)));
}

}  // namespace

const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::NtXent: return "nt_xent";
    case LossKind::Ts2Vec: return "ts2vec";
    case LossKind::Cocoa: return "cocoa";
  }
  return "?";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "nt_xent") return LossKind::NtXent;
  if (name == "ts2vec") return LossKind::Ts2Vec;
  if (name == "cocoa") return LossKind::Cocoa;
  throw ConfigError("unknown loss '" + name + "' (expected nt_xent, ts2vec or cocoa)");
}

void LossConfig::validate() const {
  if (!(tau > 0.0)) throw ConfigError("loss temperature tau must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("COCOA lambda must be non-negative");
}

Tensor nt_xent_pair(const Tensor& zw, const Tensor& zv, double tau) {
  if (zw.rank() != 2 || zw.shape() != zv.shape())
    throw DimensionError("nt_xent_pair: expected two [N, D] views of equal shape, got " + shape_string(zw.shape()) +
                         " and " + shape_string(zv.shape()));
  if (zw.size(0) == 0) throw DimensionError("nt_xent_pair: empty batch");
  const Tensor cross = scaled_cosine_similarity(zw, zv, tau);
  const Tensor self_sim = scaled_cosine_similarity(zw, zw, tau);
  return scale(contrast_rows(cross, self_sim), 1.0 / double(zw.size(0)));
}

Tensor nt_xent(std::span<const Tensor> views, double tau) {
  require_views(views, "NT-Xent");
  std::vector<Tensor> flat;
  for (const auto& v : views) flat.push_back(flatten_samples(v));
  std::vector<Tensor> terms;
  for (std::size_t v = 0; v < flat.size(); ++v)
    for (std::size_t w = 0; w < flat.size(); ++w)
      if (w != v) terms.push_back(nt_xent_pair(flat[w], flat[v], tau));
  const double pairs = double(flat.size() * (flat.size() - 1));
  return scale(add_n(terms), 1.0 / pairs);
}

Tensor nt_xent(const ViewSet& views, double tau) { return nt_xent(views.views, tau); }

Tensor ts2vec_dual(const Tensor& zw, const Tensor& zv) {
  if (zw.rank() != 3 || zw.shape() != zv.shape())
    throw DimensionError("ts2vec_dual: expected two [N, T, L] views of equal shape, got " + shape_string(zw.shape()) +
                         " and " + shape_string(zv.shape()));
  const std::size_t n = zw.size(0), t = zw.size(1);
  if (n == 0 || t == 0) throw DimensionError("ts2vec_dual: empty batch or time axis");

  std::vector<Tensor> terms;
  if (t > 1) {
    const Tensor wt = transpose(zw, 1, 2);
    terms.push_back(contrast_rows(bmm(zw, transpose(zv, 1, 2)), bmm(zw, wt)));
  }
  if (n > 1) {
    const Tensor w = transpose(zw, 0, 1);  // [T, N, L]
    const Tensor v = transpose(zv, 0, 1);
    terms.push_back(contrast_rows(bmm(w, transpose(v, 1, 2)), bmm(w, transpose(w, 1, 2))));
  }
  if (terms.empty()) return zero_like_loss(zw);
  return scale(add_n(terms), 1.0 / double(2 * n * t));
}

std::size_t ts2vec_level_count(std::size_t t) {
  std::size_t levels = 1;
  while (t > 1) {
    t = maxpool_output_length(t, 2, 2);
    ++levels;
  }
  return levels;
}

Tensor ts2vec_hierarchical(const Tensor& zw, const Tensor& zv) {
  if (zw.rank() != 3 || zw.shape() != zv.shape())
    throw DimensionError("ts2vec_hierarchical: expected two [N, T, L] views of equal shape");
  std::vector<Tensor> levels;
  // Pool along time, which is the last axis in [N, L, T] layout.
  Tensor w = transpose(zw, 1, 2), v = transpose(zv, 1, 2);
  while (true) {
    levels.push_back(ts2vec_dual(transpose(w, 1, 2), transpose(v, 1, 2)));
    if (w.size(2) == 1) break;
    w = maxpool1d(w, 2, 2);
    v = maxpool1d(v, 2, 2);
  }
  return scale(add_n(levels), 1.0 / double(levels.size()));
}

Tensor ts2vec(std::span<const Tensor> views, bool hierarchical) {
  require_views(views, "TS2Vec");
  std::vector<Tensor> seq;
  for (const auto& v : views) {
    if (v.rank() != 3) throw DimensionError("TS2Vec views must be [N, L, T]");
    seq.push_back(transpose(v, 1, 2));
  }
  std::vector<Tensor> terms;
  for (std::size_t v = 0; v < seq.size(); ++v)
    for (std::size_t w = 0; w < seq.size(); ++w)
      if (w != v) terms.push_back(hierarchical ? ts2vec_hierarchical(seq[w], seq[v]) : ts2vec_dual(seq[w], seq[v]));
  return scale(add_n(terms), 1.0 / double(seq.size() * (seq.size() - 1)));
}

Tensor ts2vec(const ViewSet& views, bool hierarchical) { return ts2vec(views.views, hierarchical); }

Tensor cocoa(std::span<const Tensor> views, double tau, double lambda, LossDiagnostics* diagnostics) {
  require_views(views, "COCOA");
  if (!(tau > 0.0)) throw ConfigError("COCOA temperature must be positive");
  std::vector<Tensor> flat;
  for (const auto& v : views) flat.push_back(flatten_samples(v));
  const std::size_t n = flat[0].size(0);
  std::size_t* counter = diagnostics ? &diagnostics->clamped_exponents : nullptr;

  std::vector<Tensor> cross;
  for (std::size_t v = 0; v < flat.size(); ++v)
    for (std::size_t w = 0; w < flat.size(); ++w) {
      if (w == v) continue;
      const Tensor sim = diagonal(scaled_cosine_similarity(flat[w], flat[v], tau));
      cross.push_back(sum(exp(clamp_max(add_scalar(scale(sim, -1.0), 1.0 / tau), kCocoaMaxExponent, counter))));
    }
  std::vector<Tensor> disc;
  for (const auto& z : flat) {
    const Tensor e = exp(clamp_max(scaled_cosine_similarity(z, z, tau), kCocoaMaxExponent, counter));
    disc.push_back(scale(sum(fill_diagonal(e, 0.0)), 1.0 / double(n)));
  }
  return add(add_n(cross), scale(add_n(disc), lambda));
}

Tensor cocoa(const ViewSet& views, double tau, double lambda, LossDiagnostics* diagnostics) {
  return cocoa(views.views, tau, lambda, diagnostics);
}

Tensor contrastive_loss(LossKind kind, const ViewSet& views, const LossConfig& config, LossDiagnostics* diagnostics) {
  config.validate();
  switch (kind) {
    case LossKind::NtXent: return nt_xent(views, config.tau);
    case LossKind::Ts2Vec: return ts2vec(views, config.hierarchical);
    case LossKind::Cocoa: return cocoa(views, config.tau, config.lambda, diagnostics);
  }
  throw ConfigError("unknown loss kind");
}

}  // namespace mvts
