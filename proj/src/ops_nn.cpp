#include <cmath>

#include "mvts/ops.hpp"
#include "ops_common.hpp"

namespace mvts {

using detail::grad_target;
using detail::make_result;

namespace {

Tensor group_norm_impl(const Tensor& input, std::size_t groups, const Tensor* gamma, const Tensor* beta, double eps) {
  detail::require_rank(input, 3, "group_norm");
  const std::size_t n = input.size(0), c = input.size(1), t = input.size(2);
  if (groups == 0 || c % groups != 0)
    throw ConfigError("group_norm: " + std::to_string(c) + " channels not divisible into " + std::to_string(groups) +
                      " groups");
  if (!(eps > 0.0)) throw ConfigError("group_norm: eps must be positive");
  if (gamma && (gamma->shape() != Shape{c} || beta->shape() != Shape{c}))
    throw DimensionError("group_norm: affine parameters must have shape (" + std::to_string(c) + ")");

  const std::size_t per_group = (c / groups) * t;
  const double* x = input.data().data();
  std::vector<double> means(n * groups), inv_std(n * groups);
  std::vector<double> out(input.numel());
  for (std::size_t s = 0; s < n * groups; ++s) {
    const double* gx = x + s * per_group;
    double mu = 0.0;
    for (std::size_t i = 0; i < per_group; ++i) mu += gx[i];
    mu /= double(per_group);
    double var = 0.0;
    for (std::size_t i = 0; i < per_group; ++i) var += (gx[i] - mu) * (gx[i] - mu);
    var /= double(per_group);
    means[s] = mu;
    inv_std[s] = 1.0 / std::sqrt(var + eps);
    for (std::size_t i = 0; i < per_group; ++i) out[s * per_group + i] = (gx[i] - mu) * inv_std[s];
  }
  if (gamma) {
    const double* g = gamma->data().data();
    const double* b = beta->data().data();
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < t; ++i) {
          double& v = out[(s * c + ch) * t + i];
          v = v * g[ch] + b[ch];
        }
  }

  Tensor gam = gamma ? *gamma : Tensor();
  Tensor bet = beta ? *beta : Tensor();
  auto backward = [=](detail::Node& self) {
    const double* x = input.data().data();
    const double* gvals = gam.defined() ? gam.data().data() : nullptr;
    double* gx = grad_target(input);
    double* ggam = gam.defined() ? grad_target(gam) : nullptr;
    double* gbet = bet.defined() ? grad_target(bet) : nullptr;
    const std::size_t cpg = c / groups;
    std::vector<double> dxhat(per_group);
    for (std::size_t s = 0; s < n * groups; ++s) {
      const std::size_t group = s % groups;
      double mean_d = 0.0, mean_dx = 0.0;
      for (std::size_t i = 0; i < per_group; ++i) {
        const std::size_t ch = group * cpg + i / t;
        const double dy = self.grad[s * per_group + i];
        const double xhat = (x[s * per_group + i] - means[s]) * inv_std[s];
        if (ggam) ggam[ch] += dy * xhat;
        if (gbet) gbet[ch] += dy;
        dxhat[i] = gvals ? dy * gvals[ch] : dy;
        mean_d += dxhat[i];
        mean_dx += dxhat[i] * xhat;
      }
      if (!gx) continue;
      mean_d /= double(per_group);
      mean_dx /= double(per_group);
      for (std::size_t i = 0; i < per_group; ++i) {
        const double xhat = (x[s * per_group + i] - means[s]) * inv_std[s];
        gx[s * per_group + i] += inv_std[s] * (dxhat[i] - mean_d - xhat * mean_dx);
      }
    }
  };
  if (gamma) return make_result(input.shape(), std::move(out), {input, gam, bet}, backward);
  return make_result(input.shape(), std::move(out), {input}, backward);
}

}  // namespace

Tensor group_norm(const Tensor& input, std::size_t groups, double eps) {
  return group_norm_impl(input, groups, nullptr, nullptr, eps);
}

Tensor group_norm(const Tensor& input, std::size_t groups, const Tensor& gamma, const Tensor& beta, double eps) {
  return group_norm_impl(input, groups, &gamma, &beta, eps);
}

std::size_t maxpool_output_length(std::size_t length, std::size_t kernel, std::size_t stride) {
  if (kernel == 0 || stride == 0) throw ConfigError("maxpool1d: kernel and stride must be >= 1");
  if (length < kernel) return 1;
  return (length - kernel) / stride + 1;
}

Tensor maxpool1d(const Tensor& input, std::size_t kernel, std::size_t stride) {
  detail::require_min_rank(input, 1, "maxpool1d");
  const std::size_t t = input.shape().back();
  if (t == 0) throw DimensionError("maxpool1d: empty time axis");
  const std::size_t tout = maxpool_output_length(t, kernel, stride);
  const std::size_t window = t < kernel ? t : kernel;
  const std::size_t rows = input.numel() / t;
  Shape out_shape = input.shape();
  out_shape.back() = tout;
  std::vector<double> out(rows * tout);
  std::vector<std::size_t> argmax(rows * tout);
  const double* x = input.data().data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t o = 0; o < tout; ++o) {
      const std::size_t begin = r * t + o * stride;
      std::size_t best = begin;
      for (std::size_t j = 1; j < window; ++j)
        if (x[begin + j] > x[best]) best = begin + j;  // strict: first index wins ties
      out[r * tout + o] = x[best];
      argmax[r * tout + o] = best;
    }
  return make_result(std::move(out_shape), std::move(out), {input}, [input, argmax](detail::Node& self) {
    double* g = grad_target(input);
    if (!g) return;
    for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += self.grad[i];
  });
}

std::vector<std::size_t> adaptive_pool_bounds(std::size_t length, std::size_t bins) {
  if (bins == 0 || length < bins)
    throw ConfigError("adaptive pooling of length " + std::to_string(length) + " into " + std::to_string(bins) +
                      " bins");
  std::vector<std::size_t> bounds(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) bounds[i] = i * length / bins;
  return bounds;
}

Tensor avgpool1d(const Tensor& input, std::span<const std::size_t> bounds) {
  detail::require_min_rank(input, 1, "avgpool1d");
  const std::size_t t = input.shape().back();
  if (bounds.size() < 2 || bounds.back() > t)
    throw DimensionError("avgpool1d: bin boundaries do not fit a length-" + std::to_string(t) + " axis");
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
    if (bounds[i + 1] <= bounds[i]) throw DimensionError("avgpool1d: empty or decreasing bin");
  const std::size_t bins = bounds.size() - 1;
  const std::size_t rows = input.numel() / t;
  std::vector<std::size_t> b(bounds.begin(), bounds.end());
  Shape out_shape = input.shape();
  out_shape.back() = bins;
  std::vector<double> out(rows * bins);
  const double* x = input.data().data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < bins; ++i) {
      double s = 0.0;
      for (std::size_t j = b[i]; j < b[i + 1]; ++j) s += x[r * t + j];
      out[r * bins + i] = s / double(b[i + 1] - b[i]);
    }
  return make_result(std::move(out_shape), std::move(out), {input}, [input, b, t, rows, bins](detail::Node& self) {
    double* g = grad_target(input);
    if (!g) return;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t i = 0; i < bins; ++i) {
        const double share = self.grad[r * bins + i] / double(b[i + 1] - b[i]);
        for (std::size_t j = b[i]; j < b[i + 1]; ++j) g[r * t + j] += share;
      }
  });
}

Tensor dropout(const Tensor& input, double rate, bool train, Rng* rng) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must lie in [0, 1)");
  if (!train || rate == 0.0) return input;
  if (!rng) throw UsageError("dropout in training mode needs a random generator");
  const double keep_scale = 1.0 / (1.0 - rate);
  const double* x = input.data().data();
  std::vector<std::uint8_t> keep(input.numel());
  std::vector<double> out(input.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    keep[i] = uniform01(*rng) >= rate;
    out[i] = keep[i] ? x[i] * keep_scale : 0.0;
  }
  return make_result(input.shape(), std::move(out), {input}, [input, keep, keep_scale](detail::Node& self) {
    double* g = grad_target(input);
    if (!g) return;
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (keep[i]) g[i] += self.grad[i] * keep_scale;
  });
}

Tensor scaled_cosine_similarity(const Tensor& a, const Tensor& b, double tau) {
  detail::require_rank(a, 2, "scaled_cosine_similarity");
  detail::require_rank(b, 2, "scaled_cosine_similarity");
  if (!(tau > 0.0)) throw ConfigError("temperature must be positive");
  const std::size_t n = a.size(0), m = b.size(0), d = a.size(1);
  if (b.size(1) != d)
    throw DimensionError("scaled_cosine_similarity: feature sizes differ, " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));

  auto row_norms = [d](const Tensor& x) {
    std::vector<double> r(x.size(0));
    for (std::size_t i = 0; i < r.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += x.data()[i * d + k] * x.data()[i * d + k];
      r[i] = std::sqrt(s);
    }
    return r;
  };
  const std::vector<double> ra = row_norms(a), rb = row_norms(b);
  const double* x = a.data().data();
  const double* y = b.data().data();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += x[i * d + k] * y[j * d + k];
      out[i * m + j] = dot / (tau * (ra[i] + kCosineNormEps) * (rb[j] + kCosineNormEps));
    }

  return make_result({n, m}, std::move(out), {a, b}, [a, b, ra, rb, tau, n, m, d](detail::Node& self) {
    const double* x = a.data().data();
    const double* y = b.data().data();
    // d/dv of v/(|v|+eps) applied to an upstream vector u:
    //   u/(|v|+eps) - v (v.u) / ((|v|+eps)^2 |v|)
    auto unnormalize = [d](const double* v, double r, const double* u, double* dst) {
      const double nr = r + kCosineNormEps;
      double vu = 0.0;
      for (std::size_t k = 0; k < d; ++k) vu += v[k] * u[k];
      const double coef = r > 0.0 ? vu / (nr * nr * r) : 0.0;
      for (std::size_t k = 0; k < d; ++k) dst[k] += u[k] / nr - v[k] * coef;
    };
    std::vector<double> u(d);
    if (double* ga = grad_target(a))
      for (std::size_t i = 0; i < n; ++i) {
        std::fill(u.begin(), u.end(), 0.0);
        for (std::size_t j = 0; j < m; ++j) {
          const double w = self.grad[i * m + j] / (tau * (rb[j] + kCosineNormEps));
          for (std::size_t k = 0; k < d; ++k) u[k] += w * y[j * d + k];
        }
        unnormalize(x + i * d, ra[i], u.data(), ga + i * d);
      }
    if (double* gb = grad_target(b))
      for (std::size_t j = 0; j < m; ++j) {
        std::fill(u.begin(), u.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const double w = self.grad[i * m + j] / (tau * (ra[i] + kCosineNormEps));
          for (std::size_t k = 0; k < d; ++k) u[k] += w * x[i * d + k];
        }
        unnormalize(y + j * d, rb[j], u.data(), gb + j * d);
      }
  });
}

}  // namespace mvts
