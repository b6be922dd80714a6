#include <cmath>
#include <limits>
#include <numbers>

#include "mvts/ops.hpp"
#include "ops_common.hpp"

namespace mvts {

using detail::grad_target;
using detail::make_result;

namespace {

// Shared scaffolding for unary elementwise ops: `f` maps x -> y and
// `df(x, y)` returns dy/dx.
template <class F, class DF>
Tensor unary(const Tensor& a, F f, DF df) {
  const auto x = a.data();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return make_result(a.shape(), std::move(y), {a}, [a, df](detail::Node& self) {
    double* ga = grad_target(a);
    if (!ga) return;
    const auto x = a.data();
    for (std::size_t i = 0; i < x.size(); ++i) ga[i] += self.grad[i] * df(x[i], self.data[i]);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "add");
  const auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return make_result(a.shape(), std::move(out), {a, b}, [a, b](detail::Node& self) {
    if (double* ga = grad_target(a))
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    if (double* gb = grad_target(b))
      for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i] += self.grad[i];
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "sub");
  const auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return make_result(a.shape(), std::move(out), {a, b}, [a, b](detail::Node& self) {
    if (double* ga = grad_target(a))
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    if (double* gb = grad_target(b))
      for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i] -= self.grad[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "mul");
  const auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return make_result(a.shape(), std::move(out), {a, b}, [a, b](detail::Node& self) {
    const auto x = a.data(), y = b.data();
    if (double* ga = grad_target(a))
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] * y[i];
    if (double* gb = grad_target(b))
      for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i] += self.grad[i] * x[i];
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double value) {
  return unary(a, [value](double x) { return x + value; }, [](double, double) { return 1.0; });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor ln(const Tensor& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor gelu(const Tensor& a) {
  constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return unary(
      a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
      [inv_sqrt_2pi](double x, double) {
        const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
        return cdf + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
      });
}

Tensor clamp_max(const Tensor& a, double limit, std::size_t* clamped) {
  if (clamped) {
    for (double x : a.data())
      if (x > limit) ++*clamped;
  }
  return unary(a, [limit](double x) { return x > limit ? limit : x; },
               [limit](double x, double) { return x > limit ? 0.0 : 1.0; });
}

Tensor add_n(std::span<const Tensor> terms) {
  if (terms.empty()) throw UsageError("add_n: no terms");
  for (const auto& t : terms) detail::require_same_shape(terms[0], t, "add_n");
  std::vector<double> out(terms[0].numel(), 0.0);
  for (const auto& t : terms) {
    const auto x = t.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += x[i];
  }
  std::vector<Tensor> inputs(terms.begin(), terms.end());
  return make_result(terms[0].shape(), std::move(out), std::span<const Tensor>(inputs),
                     [inputs](detail::Node& self) {
                       for (const auto& t : inputs)
                         if (double* g = grad_target(t))
                           for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
                     });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.data()) s += x;
  return make_result({}, {s}, {a}, [a](detail::Node& self) {
    if (double* g = grad_target(a))
      for (std::size_t i = 0; i < a.numel(); ++i) g[i] += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw DimensionError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

namespace {

// Rows over the last axis: returns (rows, width).
std::pair<std::size_t, std::size_t> last_axis_rows(const Tensor& a, const char* op) {
  detail::require_min_rank(a, 1, op);
  const std::size_t width = a.shape().back();
  if (width == 0) throw DimensionError(std::string(op) + ": empty last axis");
  return {a.numel() / width, width};
}

double row_max(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) m = x[j] > m ? x[j] : m;
  return m;
}

}  // namespace

Tensor logsumexp(const Tensor& a) {
  const auto [rows, width] = last_axis_rows(a, "logsumexp");
  Shape out_shape(a.shape().begin(), a.shape().end() - 1);
  std::vector<double> out(rows);
  const double* x = a.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x + r * width;
    const double m = row_max(row, width);
    if (std::isinf(m) && m < 0) {
      out[r] = m;
      continue;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < width; ++j) s += std::exp(row[j] - m);
    out[r] = m + std::log(s);
  }
  return make_result(std::move(out_shape), std::move(out), {a}, [a, width](detail::Node& self) {
    double* g = grad_target(a);
    if (!g) return;
    const double* x = a.data().data();
    for (std::size_t r = 0; r < self.data.size(); ++r) {
      if (std::isinf(self.data[r])) continue;
      for (std::size_t j = 0; j < width; ++j)
        g[r * width + j] += self.grad[r] * std::exp(x[r * width + j] - self.data[r]);
    }
  });
}

Tensor softmax(const Tensor& a) {
  const auto [rows, width] = last_axis_rows(a, "softmax");
  std::vector<double> out(a.numel());
  const double* x = a.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x + r * width;
    const double m = row_max(row, width);
    double s = 0.0;
    for (std::size_t j = 0; j < width; ++j) s += (out[r * width + j] = std::exp(row[j] - m));
    for (std::size_t j = 0; j < width; ++j) out[r * width + j] /= s;
  }
  return make_result(a.shape(), std::move(out), {a}, [a, width](detail::Node& self) {
    double* g = grad_target(a);
    if (!g) return;
    const std::size_t rows = self.data.size() / width;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.data.data() + r * width;
      const double* gy = self.grad.data() + r * width;
      double dot = 0.0;
      for (std::size_t j = 0; j < width; ++j) dot += gy[j] * y[j];
      for (std::size_t j = 0; j < width; ++j) g[r * width + j] += y[j] * (gy[j] - dot);
    }
  });
}

Tensor log_softmax(const Tensor& a) {
  const auto [rows, width] = last_axis_rows(a, "log_softmax");
  std::vector<double> out(a.numel());
  const double* x = a.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x + r * width;
    const double m = row_max(row, width);
    double s = 0.0;
    for (std::size_t j = 0; j < width; ++j) s += std::exp(row[j] - m);
    const double lse = m + std::log(s);
    for (std::size_t j = 0; j < width; ++j) out[r * width + j] = row[j] - lse;
  }
  return make_result(a.shape(), std::move(out), {a}, [a, width](detail::Node& self) {
    double* g = grad_target(a);
    if (!g) return;
    const std::size_t rows = self.data.size() / width;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.data.data() + r * width;
      const double* gy = self.grad.data() + r * width;
      double total = 0.0;
      for (std::size_t j = 0; j < width; ++j) total += gy[j];
      for (std::size_t j = 0; j < width; ++j) g[r * width + j] += gy[j] - std::exp(y[j]) * total;
    }
  });
}

}  // namespace mvts
