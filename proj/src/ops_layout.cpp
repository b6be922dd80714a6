#include <algorithm>

#include "mvts/ops.hpp"
#include "ops_common.hpp"

namespace mvts {

using detail::grad_target;
using detail::make_result;

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel())
    throw DimensionError("reshape: cannot view " + shape_string(a.shape()) + " as " + shape_string(shape));
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_result(std::move(shape), std::move(out), {a}, [a](detail::Node& self) {
    if (double* g = grad_target(a))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor transpose(const Tensor& a, std::size_t axis0, std::size_t axis1) {
  const Shape& in = a.shape();
  if (axis0 >= in.size() || axis1 >= in.size())
    throw DimensionError("transpose: axis out of range for shape " + shape_string(in));
  if (axis0 > axis1) std::swap(axis0, axis1);
  Shape out_shape = in;
  std::swap(out_shape[axis0], out_shape[axis1]);
  if (axis0 == axis1) return reshape(a, out_shape);

  // View the tensor as [outer, d0, mid, d1, inner] and swap d0/d1.
  std::size_t outer = 1, mid = 1, inner = 1;
  for (std::size_t i = 0; i < axis0; ++i) outer *= in[i];
  for (std::size_t i = axis0 + 1; i < axis1; ++i) mid *= in[i];
  for (std::size_t i = axis1 + 1; i < in.size(); ++i) inner *= in[i];
  const std::size_t d0 = in[axis0], d1 = in[axis1];

  // Maps source offset -> destination offset; used in both directions.
  auto for_each = [=](auto&& fn) {
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t i0 = 0; i0 < d0; ++i0)
        for (std::size_t m = 0; m < mid; ++m)
          for (std::size_t i1 = 0; i1 < d1; ++i1) {
            const std::size_t src = (((o * d0 + i0) * mid + m) * d1 + i1) * inner;
            const std::size_t dst = (((o * d1 + i1) * mid + m) * d0 + i0) * inner;
            fn(src, dst);
          }
  };

  std::vector<double> out(a.numel());
  const double* x = a.data().data();
  for_each([&](std::size_t src, std::size_t dst) { std::copy_n(x + src, inner, out.data() + dst); });
  return make_result(std::move(out_shape), std::move(out), {a}, [a, for_each, inner](detail::Node& self) {
    double* g = grad_target(a);
    if (!g) return;
    for_each([&](std::size_t src, std::size_t dst) {
      for (std::size_t k = 0; k < inner; ++k) g[src + k] += self.grad[dst + k];
    });
  });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t length) {
  const Shape& in = a.shape();
  if (axis >= in.size()) throw DimensionError("slice: axis out of range for shape " + shape_string(in));
  if (start + length > in[axis])
    throw DimensionError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") exceeds extent " + std::to_string(in[axis]));
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= in[i];
  for (std::size_t i = axis + 1; i < in.size(); ++i) inner *= in[i];
  const std::size_t extent = in[axis];
  Shape out_shape = in;
  out_shape[axis] = length;

  std::vector<double> out(outer * length * inner);
  const double* x = a.data().data();
  for (std::size_t o = 0; o < outer; ++o)
    std::copy_n(x + (o * extent + start) * inner, length * inner, out.data() + o * length * inner);
  return make_result(std::move(out_shape), std::move(out), {a},
                     [a, outer, inner, extent, start, length](detail::Node& self) {
                       double* g = grad_target(a);
                       if (!g) return;
                       for (std::size_t o = 0; o < outer; ++o)
                         for (std::size_t k = 0; k < length * inner; ++k)
                           g[(o * extent + start) * inner + k] += self.grad[o * length * inner + k];
                     });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw UsageError("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) throw DimensionError("concat: axis out of range for shape " + shape_string(first));
  std::size_t total = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || s[i] == first[i];
    if (!ok) throw DimensionError("concat: incompatible shapes " + shape_string(first) + " and " + shape_string(s));
    total += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= first[i];
  for (std::size_t i = axis + 1; i < first.size(); ++i) inner *= first[i];
  Shape out_shape = first;
  out_shape[axis] = total;

  std::vector<double> out(outer * total * inner);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t chunk = p.shape()[axis] * inner;
    const double* x = p.data().data();
    for (std::size_t o = 0; o < outer; ++o) std::copy_n(x + o * chunk, chunk, out.data() + o * total * inner + offset);
    offset += chunk;
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return make_result(std::move(out_shape), std::move(out), std::span<const Tensor>(inputs),
                     [inputs, axis, outer, inner, total](detail::Node& self) {
                       std::size_t offset = 0;
                       for (const auto& p : inputs) {
                         const std::size_t chunk = p.shape()[axis] * inner;
                         if (double* g = grad_target(p))
                           for (std::size_t o = 0; o < outer; ++o)
                             for (std::size_t k = 0; k < chunk; ++k)
                               g[o * chunk + k] += self.grad[o * total * inner + offset + k];
                         offset += chunk;
                       }
                     });
}

namespace {

std::pair<std::size_t, std::size_t> square_batches(const Tensor& a, const char* op) {
  detail::require_min_rank(a, 2, op);
  const Shape& s = a.shape();
  const std::size_t n = s[s.size() - 1];
  if (s[s.size() - 2] != n) throw DimensionError(std::string(op) + ": trailing axes not square in " + shape_string(s));
  return {n == 0 ? 0 : a.numel() / (n * n), n};
}

}  // namespace

Tensor diagonal(const Tensor& a) {
  const auto [batches, n] = square_batches(a, "diagonal");
  Shape out_shape(a.shape().begin(), a.shape().end() - 1);
  std::vector<double> out(batches * n);
  const double* x = a.data().data();
  for (std::size_t b = 0; b < batches; ++b)
    for (std::size_t i = 0; i < n; ++i) out[b * n + i] = x[(b * n + i) * n + i];
  return make_result(std::move(out_shape), std::move(out), {a}, [a, batches, n](detail::Node& self) {
    double* g = grad_target(a);
    if (!g) return;
    for (std::size_t b = 0; b < batches; ++b)
      for (std::size_t i = 0; i < n; ++i) g[(b * n + i) * n + i] += self.grad[b * n + i];
  });
}

Tensor fill_diagonal(const Tensor& a, double value) {
  const auto [batches, n] = square_batches(a, "fill_diagonal");
  std::vector<double> out(a.data().begin(), a.data().end());
  for (std::size_t b = 0; b < batches; ++b)
    for (std::size_t i = 0; i < n; ++i) out[(b * n + i) * n + i] = value;
  return make_result(a.shape(), std::move(out), {a}, [a, n](detail::Node& self) {
    double* g = grad_target(a);
    if (!g) return;
    for (std::size_t k = 0; k < self.grad.size(); ++k) {
      const std::size_t row = (k / n) % n, col = k % n;
      if (row != col) g[k] += self.grad[k];
    }
  });
}

Tensor pick(const Tensor& a, std::span<const std::size_t> index) {
  detail::require_rank(a, 2, "pick");
  const std::size_t rows = a.size(0), cols = a.size(1);
  if (index.size() != rows)
    throw DimensionError("pick: " + std::to_string(index.size()) + " indices for " + std::to_string(rows) + " rows");
  std::vector<std::size_t> idx(index.begin(), index.end());
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (idx[r] >= cols) throw DimensionError("pick: index " + std::to_string(idx[r]) + " out of range");
    out[r] = a.data()[r * cols + idx[r]];
  }
  return make_result({rows}, std::move(out), {a}, [a, idx, cols](detail::Node& self) {
    double* g = grad_target(a);
    if (!g) return;
    for (std::size_t r = 0; r < idx.size(); ++r) g[r * cols + idx[r]] += self.grad[r];
  });
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
  return scale(mean(pick(log_softmax(logits), labels)), -1.0);
}

}  // namespace mvts
