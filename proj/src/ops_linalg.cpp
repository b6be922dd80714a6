#include <Eigen/Core>

#include "mvts/ops.hpp"
#include "ops_common.hpp"

namespace mvts {

using detail::grad_target;
using detail::make_result;

namespace {
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;
using Eigen::Index;
}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::require_rank(a, 2, "matmul");
  detail::require_rank(b, 2, "matmul");
  const Index m = a.size(0), k = a.size(1), n = b.size(1);
  if (b.size(0) != static_cast<std::size_t>(k))
    throw DimensionError("matmul: inner extents differ, " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  std::vector<double> out(m * n);
  MapMat(out.data(), m, n).noalias() = MapConstMat(a.data().data(), m, k) * MapConstMat(b.data().data(), k, n);
  return make_result({std::size_t(m), std::size_t(n)}, std::move(out), {a, b}, [a, b, m, k, n](detail::Node& self) {
    MapConstMat g(self.grad.data(), m, n);
    if (double* ga = grad_target(a)) MapMat(ga, m, k).noalias() += g * MapConstMat(b.data().data(), k, n).transpose();
    if (double* gb = grad_target(b)) MapMat(gb, k, n).noalias() += MapConstMat(a.data().data(), m, k).transpose() * g;
  });
}

Tensor bmm(const Tensor& a, const Tensor& b) {
  detail::require_rank(a, 3, "bmm");
  detail::require_rank(b, 3, "bmm");
  const Index batches = a.size(0), m = a.size(1), k = a.size(2), n = b.size(2);
  if (b.size(0) != std::size_t(batches) || b.size(1) != std::size_t(k))
    throw DimensionError("bmm: incompatible shapes " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  std::vector<double> out(batches * m * n);
  for (Index i = 0; i < batches; ++i)
    MapMat(out.data() + i * m * n, m, n).noalias() =
        MapConstMat(a.data().data() + i * m * k, m, k) * MapConstMat(b.data().data() + i * k * n, k, n);
  return make_result({std::size_t(batches), std::size_t(m), std::size_t(n)}, std::move(out), {a, b},
                     [a, b, batches, m, k, n](detail::Node& self) {
                       double* ga = grad_target(a);
                       double* gb = grad_target(b);
                       for (Index i = 0; i < batches; ++i) {
                         MapConstMat g(self.grad.data() + i * m * n, m, n);
                         if (ga)
                           MapMat(ga + i * m * k, m, k).noalias() +=
                               g * MapConstMat(b.data().data() + i * k * n, k, n).transpose();
                         if (gb)
                           MapMat(gb + i * k * n, k, n).noalias() +=
                               MapConstMat(a.data().data() + i * m * k, m, k).transpose() * g;
                       }
                     });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  detail::require_min_rank(x, 1, "linear");
  detail::require_rank(weight, 2, "linear");
  const Index din = weight.size(0), dout = weight.size(1);
  if (x.shape().back() != std::size_t(din))
    throw DimensionError("linear: input feature size " + std::to_string(x.shape().back()) + " does not match weight " +
                         shape_string(weight.shape()));
  if (bias.defined() && bias.shape() != Shape{std::size_t(dout)})
    throw DimensionError("linear: bias shape " + shape_string(bias.shape()) + " does not match output size");
  const Index rows = x.numel() / din;
  Shape out_shape = x.shape();
  out_shape.back() = dout;
  std::vector<double> out(rows * dout);
  MapMat y(out.data(), rows, dout);
  y.noalias() = MapConstMat(x.data().data(), rows, din) * MapConstMat(weight.data().data(), din, dout);
  if (bias.defined()) y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data().data(), dout);

  auto backward = [x, weight, bias, rows, din, dout](detail::Node& self) {
    MapConstMat g(self.grad.data(), rows, dout);
    if (double* gx = grad_target(x))
      MapMat(gx, rows, din).noalias() += g * MapConstMat(weight.data().data(), din, dout).transpose();
    if (double* gw = grad_target(weight))
      MapMat(gw, din, dout).noalias() += MapConstMat(x.data().data(), rows, din).transpose() * g;
    if (bias.defined())
      if (double* gb = grad_target(bias)) Eigen::Map<Eigen::RowVectorXd>(gb, dout) += g.colwise().sum();
  };
  if (bias.defined()) return make_result(std::move(out_shape), std::move(out), {x, weight, bias}, backward);
  return make_result(std::move(out_shape), std::move(out), {x, weight}, backward);
}

std::size_t conv_output_length(std::size_t length, std::size_t kernel, std::size_t stride, std::size_t padding) {
  if (kernel == 0 || stride == 0) throw ConfigError("conv: kernel and stride must be >= 1");
  if (length + 2 * padding < kernel)
    throw DimensionError("conv: padded length " + std::to_string(length + 2 * padding) + " shorter than kernel " +
                         std::to_string(kernel));
  return (length + 2 * padding - kernel) / stride + 1;
}

Tensor conv1d(const Tensor& input, const Tensor& kernels, std::size_t stride, std::size_t padding) {
  detail::require_rank(input, 3, "conv1d");
  detail::require_rank(kernels, 3, "conv1d");
  const std::size_t n = input.size(0), cin = input.size(1), t = input.size(2);
  const std::size_t cout = kernels.size(0), k = kernels.size(2);
  if (kernels.size(1) != cin)
    throw DimensionError("conv1d: input has " + std::to_string(cin) + " channels but kernels expect " +
                         std::to_string(kernels.size(1)));
  const std::size_t tout = conv_output_length(t, k, stride, padding);
  const Index rows = n * tout, cols = cin * k;

  // im2col: row (sample, out step), column (in channel, tap).
  auto unfold = [=](const double* x) {
    RowMat c = RowMat::Zero(rows, cols);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t ot = 0; ot < tout; ++ot) {
        double* row = c.data() + (s * tout + ot) * cols;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const double* src = x + (s * cin + ci) * t;
          for (std::size_t j = 0; j < k; ++j) {
            const std::ptrdiff_t pos = std::ptrdiff_t(ot * stride + j) - std::ptrdiff_t(padding);
            if (pos >= 0 && pos < std::ptrdiff_t(t)) row[ci * k + j] = src[pos];
          }
        }
      }
    return c;
  };

  const RowMat unfolded = unfold(input.data().data());
  const RowMat y = unfolded * MapConstMat(kernels.data().data(), cout, cols).transpose();
  std::vector<double> out(n * cout * tout);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t ot = 0; ot < tout; ++ot) out[(s * cout + co) * tout + ot] = y(s * tout + ot, co);

  return make_result({n, cout, tout}, std::move(out), {input, kernels},
                     [=](detail::Node& self) {
                       RowMat g(rows, Index(cout));
                       for (std::size_t s = 0; s < n; ++s)
                         for (std::size_t co = 0; co < cout; ++co)
                           for (std::size_t ot = 0; ot < tout; ++ot)
                             g(s * tout + ot, co) = self.grad[(s * cout + co) * tout + ot];
                       if (double* gk = grad_target(kernels))
                         MapMat(gk, cout, cols).noalias() += g.transpose() * unfold(input.data().data());
                       if (double* gx = grad_target(input)) {
                         const RowMat gc = g * MapConstMat(kernels.data().data(), cout, cols);
                         for (std::size_t s = 0; s < n; ++s)
                           for (std::size_t ot = 0; ot < tout; ++ot) {
                             const double* row = gc.data() + (s * tout + ot) * cols;
                             for (std::size_t ci = 0; ci < cin; ++ci)
                               for (std::size_t j = 0; j < k; ++j) {
                                 const std::ptrdiff_t pos = std::ptrdiff_t(ot * stride + j) - std::ptrdiff_t(padding);
                                 if (pos >= 0 && pos < std::ptrdiff_t(t)) gx[(s * cin + ci) * t + pos] += row[ci * k + j];
                               }
                           }
                       }
                     });
}

}  // namespace mvts
