#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "mvts/tensor.hpp"
#include "mvts/views.hpp"

namespace mvts {

enum class LossKind { NtXent, Ts2Vec, Cocoa };

const char* to_string(LossKind k);
LossKind parse_loss_kind(const std::string& name);

struct LossConfig {
  double tau = 0.5;      // NT-Xent and COCOA temperature
  double lambda = 1.0;   // COCOA discriminator weight
  bool hierarchical = true;

  void validate() const;
};

struct LossDiagnostics {
  // COCOA exponents clipped at kCocoaMaxExponent.
  std::size_t clamped_exponents = 0;
};

inline constexpr double kCocoaMaxExponent = 50.0;

// zw, zv: [N, D]. Anchors come from zw; negatives are every zv_j plus zw_j, j != i.
Tensor nt_xent_pair(const Tensor& zw, const Tensor& zv, double tau);
// Mean of nt_xent_pair over ordered view pairs; views are flattened per sample.
Tensor nt_xent(std::span<const Tensor> views, double tau);
Tensor nt_xent(const ViewSet& views, double tau);

// zw, zv: [N, T, L], raw dot products over L. Temporal term uses other time
// steps of the same instance as negatives, the instance term other instances
// at the same time step; both are scaled by 1 / (2 N T).
Tensor ts2vec_dual(const Tensor& zw, const Tensor& zv);
// Mean of the dual loss over max-pooled levels (kernel 2, stride 2) down to
// and including the T == 1 level.
Tensor ts2vec_hierarchical(const Tensor& zw, const Tensor& zv);
std::size_t ts2vec_level_count(std::size_t t);
// Views are [N, L, T]; averaged over ordered view pairs.
Tensor ts2vec(std::span<const Tensor> views, bool hierarchical = true);
Tensor ts2vec(const ViewSet& views, bool hierarchical = true);

// Cross-view correlation summed over samples and ordered view pairs plus
// lambda times the per-view intra-view discriminator.
Tensor cocoa(std::span<const Tensor> views, double tau, double lambda, LossDiagnostics* diagnostics = nullptr);
Tensor cocoa(const ViewSet& views, double tau, double lambda, LossDiagnostics* diagnostics = nullptr);

Tensor contrastive_loss(LossKind kind, const ViewSet& views, const LossConfig& config,
                        LossDiagnostics* diagnostics = nullptr);

}  // namespace mvts
