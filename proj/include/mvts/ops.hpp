#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mvts/random.hpp"
#include "mvts/tensor.hpp"

// Differentiable operations on Tensor. Every op here has an analytic backward
// and is registered with the finite-difference checker (see gradcheck.hpp).
namespace mvts {

// Elementwise. Binary ops require identical shapes (no broadcasting).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);
Tensor exp(const Tensor& a);
Tensor ln(const Tensor& a);
Tensor relu(const Tensor& a);
// x * Phi(x) with the exact normal CDF.
Tensor gelu(const Tensor& a);
// min(x, limit); entries above the limit get zero gradient. When `clamped` is
// non-null it is incremented by the number of clamped entries.
Tensor clamp_max(const Tensor& a, double limit, std::size_t* clamped = nullptr);
Tensor add_n(std::span<const Tensor> terms);

// Reductions to a scalar.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// Reductions over the last axis.
Tensor logsumexp(const Tensor& a);  // drops the last axis
Tensor softmax(const Tensor& a);
Tensor log_softmax(const Tensor& a);

// Layout.
Tensor reshape(const Tensor& a, Shape shape);
Tensor transpose(const Tensor& a, std::size_t axis0, std::size_t axis1);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t length);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
// [..., n, n] -> [..., n]
Tensor diagonal(const Tensor& a);
// [..., n, n] with the diagonal overwritten by `value`.
Tensor fill_diagonal(const Tensor& a, double value);
// [N, K] -> [N], row i picks column index[i].
Tensor pick(const Tensor& a, std::span<const std::size_t> index);

// Linear algebra.
Tensor matmul(const Tensor& a, const Tensor& b);  // [M,K] x [K,N]
Tensor bmm(const Tensor& a, const Tensor& b);     // [B,M,K] x [B,K,N]
// x[..., in] * weight[in, out] (+ bias[out]) along the last axis.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias = {});

// Neural-network layers on [N, C, T] signals.
std::size_t conv_output_length(std::size_t length, std::size_t kernel, std::size_t stride, std::size_t padding);
// input [N, Cin, T], kernels [Cout, Cin, k]; zero padding on both ends.
Tensor conv1d(const Tensor& input, const Tensor& kernels, std::size_t stride, std::size_t padding);
Tensor group_norm(const Tensor& input, std::size_t groups, double eps);
// gamma, beta: [C] per-channel affine applied after normalization.
Tensor group_norm(const Tensor& input, std::size_t groups, const Tensor& gamma, const Tensor& beta, double eps);
// Falls back to one window over the full extent when length < kernel.
std::size_t maxpool_output_length(std::size_t length, std::size_t kernel, std::size_t stride);
Tensor maxpool1d(const Tensor& input, std::size_t kernel, std::size_t stride);
// Mean over [bounds[i], bounds[i+1]) along the last axis.
Tensor avgpool1d(const Tensor& input, std::span<const std::size_t> bounds);
std::vector<std::size_t> adaptive_pool_bounds(std::size_t length, std::size_t bins);
// Inverted dropout. Returns `input` itself when !train or rate == 0.
Tensor dropout(const Tensor& input, double rate, bool train, Rng* rng);

// [N, D] x [M, D] -> [N, M], entries a_i.b_j / (tau |a_i| |b_j|).
inline constexpr double kCosineNormEps = 1e-12;
Tensor scaled_cosine_similarity(const Tensor& a, const Tensor& b, double tau);

// Mean negative log-likelihood of `labels` under softmax(logits).
Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);

}  // namespace mvts
