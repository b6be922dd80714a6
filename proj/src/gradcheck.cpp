#include "mvts/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "mvts/encoder.hpp"
#include "mvts/losses.hpp"
#include "mvts/mpnn.hpp"
#include "mvts/ops.hpp"
#include "mvts/reference_losses.hpp"

namespace mvts {

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = uniform(rng, lo, hi);
  return Tensor::from_data(std::move(shape), std::move(v), true);
}

// Entries bounded away from `kink` by at least `gap`, so finite differences
// never straddle a non-differentiable point.
Tensor away_from(Shape shape, Rng& rng, double kink, double gap) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) {
    const double mag = gap + uniform01(rng);
    x = kink + (uniform01(rng) < 0.5 ? -mag : mag);
  }
  return Tensor::from_data(std::move(shape), std::move(v), true);
}

using Inputs = std::vector<Tensor>;
using Args = std::span<const Tensor>;

GradcheckCase unary(std::string name, std::function<Tensor(const Tensor&)> f) {
  return {std::move(name), [](Rng& r) { return Inputs{random_tensor({3, 4}, r)}; },
          [f](Args a) { return f(a[0]); }};
}

GradcheckCase binary(std::string name, std::function<Tensor(const Tensor&, const Tensor&)> f) {
  return {std::move(name), [](Rng& r) { return Inputs{random_tensor({2, 3, 2}, r), random_tensor({2, 3, 2}, r)}; },
          [f](Args a) { return f(a[0], a[1]); }};
}

// Views [N, L, T] for the losses.
Inputs loss_views(Rng& r, std::size_t v, std::size_t n, std::size_t l, std::size_t t) {
  Inputs out;
  for (std::size_t i = 0; i < v; ++i) out.push_back(random_tensor({n, l, t}, r));
  return out;
}

double l2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Tensor project(const Tensor& out, const Tensor& direction) {
  if (out.numel() == 1 && out.rank() == 0) return out;
  return sum(mul(out, direction));
}

}  // namespace

std::vector<GradcheckCase> gradcheck_cases() {
  std::vector<GradcheckCase> cases;
  cases.push_back(binary("add", [](auto& a, auto& b) { return add(a, b); }));
  cases.push_back(binary("sub", [](auto& a, auto& b) { return sub(a, b); }));
  cases.push_back(binary("mul", [](auto& a, auto& b) { return mul(a, b); }));
  cases.push_back(unary("scale", [](auto& a) { return scale(a, -1.7); }));
  cases.push_back(unary("add_scalar", [](auto& a) { return add_scalar(a, 0.3); }));
  cases.push_back(unary("exp", [](auto& a) { return exp(a); }));
  cases.push_back({"ln", [](Rng& r) { return Inputs{random_tensor({3, 4}, r, 0.2, 2.0)}; },
                   [](Args a) { return ln(a[0]); }});
  cases.push_back({"relu", [](Rng& r) { return Inputs{away_from({3, 4}, r, 0.0, 0.05)}; },
                   [](Args a) { return relu(a[0]); }});
  cases.push_back(unary("gelu", [](auto& a) { return gelu(scale(a, 3.0)); }));
  cases.push_back({"clamp_max", [](Rng& r) { return Inputs{away_from({3, 4}, r, 0.4, 0.05)}; },
                   [](Args a) { return clamp_max(a[0], 0.4); }});
  cases.push_back({"add_n", [](Rng& r) { return Inputs{random_tensor({2, 3}, r), random_tensor({2, 3}, r),
                                                       random_tensor({2, 3}, r)}; },
                   [](Args a) { return add_n(a); }});
  cases.push_back(unary("sum", [](auto& a) { return sum(a); }));
  cases.push_back(unary("mean", [](auto& a) { return mean(a); }));
  cases.push_back(unary("logsumexp", [](auto& a) { return logsumexp(scale(a, 4.0)); }));
  cases.push_back(unary("softmax", [](auto& a) { return softmax(scale(a, 3.0)); }));
  cases.push_back(unary("log_softmax", [](auto& a) { return log_softmax(scale(a, 3.0)); }));
  cases.push_back(unary("reshape", [](auto& a) { return reshape(a, {2, 6}); }));
  cases.push_back({"transpose", [](Rng& r) { return Inputs{random_tensor({2, 3, 4}, r)}; },
                   [](Args a) { return transpose(a[0], 0, 2); }});
  cases.push_back({"slice", [](Rng& r) { return Inputs{random_tensor({2, 5, 3}, r)}; },
                   [](Args a) { return slice(a[0], 1, 1, 3); }});
  cases.push_back({"concat", [](Rng& r) { return Inputs{random_tensor({2, 2, 3}, r), random_tensor({2, 1, 3}, r)}; },
                   [](Args a) { return concat(a, 1); }});
  cases.push_back({"diagonal", [](Rng& r) { return Inputs{random_tensor({2, 3, 3}, r)}; },
                   [](Args a) { return diagonal(a[0]); }});
  cases.push_back({"fill_diagonal", [](Rng& r) { return Inputs{random_tensor({2, 3, 3}, r)}; },
                   [](Args a) { return fill_diagonal(a[0], 0.5); }});
  cases.push_back({"pick", [](Rng& r) { return Inputs{random_tensor({4, 3}, r)}; },
                   [](Args a) {
                     const std::size_t idx[] = {2, 0, 1, 2};
                     return pick(a[0], idx);
                   }});
  cases.push_back({"matmul", [](Rng& r) { return Inputs{random_tensor({3, 4}, r), random_tensor({4, 2}, r)}; },
                   [](Args a) { return matmul(a[0], a[1]); }});
  cases.push_back({"bmm", [](Rng& r) { return Inputs{random_tensor({2, 3, 4}, r), random_tensor({2, 4, 2}, r)}; },
                   [](Args a) { return bmm(a[0], a[1]); }});
  cases.push_back({"linear",
                   [](Rng& r) {
                     return Inputs{random_tensor({2, 3, 4}, r), random_tensor({4, 5}, r), random_tensor({5}, r)};
                   },
                   [](Args a) { return linear(a[0], a[1], a[2]); }});
  cases.push_back({"linear_no_bias", [](Rng& r) { return Inputs{random_tensor({3, 4}, r), random_tensor({4, 2}, r)}; },
                   [](Args a) { return linear(a[0], a[1]); }});
  cases.push_back({"conv1d", [](Rng& r) { return Inputs{random_tensor({2, 3, 9}, r), random_tensor({4, 3, 3}, r)}; },
                   [](Args a) { return conv1d(a[0], a[1], 2, 1); }});
  cases.push_back({"group_norm", [](Rng& r) { return Inputs{random_tensor({2, 4, 5}, r)}; },
                   [](Args a) { return group_norm(a[0], 2, 1e-5); }});
  cases.push_back({"group_norm_affine",
                   [](Rng& r) { return Inputs{random_tensor({2, 4, 5}, r), random_tensor({4}, r), random_tensor({4}, r)}; },
                   [](Args a) { return group_norm(a[0], 2, a[1], a[2], 1e-5); }});
  cases.push_back({"maxpool1d", [](Rng& r) { return Inputs{random_tensor({2, 3, 7}, r)}; },
                   [](Args a) { return maxpool1d(a[0], 2, 2); }});
  cases.push_back({"avgpool1d", [](Rng& r) { return Inputs{random_tensor({2, 3, 9}, r)}; },
                   [](Args a) { return avgpool1d(a[0], adaptive_pool_bounds(9, 4)); }});
  cases.push_back({"dropout", [](Rng& r) { return Inputs{random_tensor({3, 8}, r)}; },
                   [](Args a) {
                     Rng mask(7);
                     return dropout(a[0], 0.3, true, &mask);
                   }});
  cases.push_back({"scaled_cosine_similarity",
                   [](Rng& r) { return Inputs{random_tensor({3, 5}, r), random_tensor({4, 5}, r)}; },
                   [](Args a) { return scaled_cosine_similarity(a[0], a[1], 0.5); }});
  cases.push_back({"cross_entropy", [](Rng& r) { return Inputs{random_tensor({4, 3}, r, -2, 2)}; },
                   [](Args a) {
                     const std::size_t y[] = {0, 2, 1, 2};
                     return cross_entropy(a[0], y);
                   }});
  cases.push_back({"nt_xent", [](Rng& r) { return loss_views(r, 3, 3, 2, 3); },
                   [](Args a) { return nt_xent(a, 0.5); }});
  cases.push_back({"ts2vec_dual", [](Rng& r) { return loss_views(r, 2, 3, 4, 2); },
                   [](Args a) { return ts2vec_dual(a[0], a[1]); }});
  cases.push_back({"ts2vec", [](Rng& r) { return loss_views(r, 3, 3, 2, 5); },
                   [](Args a) { return ts2vec(a, true); }});
  cases.push_back({"cocoa", [](Rng& r) { return loss_views(r, 3, 3, 2, 3); },
                   [](Args a) { return cocoa(a, 0.5, 0.7); }});

  // Small stacks exercise parameter gradients through composed layers.
  cases.push_back({"encoder",
                   [](Rng& r) {
                     EncoderConfig cfg{8, 4, 4, 2, {3, 2}, 1, 0.0, 1e-5};
                     auto p = EncoderParams::init(cfg, r);
                     Inputs in{random_tensor({2, 1, 16}, r)};
                     for (auto& np : p.named_parameters()) in.push_back(np.tensor);
                     return in;
                   },
                   [](Args a) {
                     EncoderConfig cfg{8, 4, 4, 2, {3, 2}, 1, 0.0, 1e-5};
                     EncoderParams p;
                     p.config = cfg;
                     std::size_t k = 1;
                     for (auto w : cfg.widths) {
                       p.blocks.push_back({a[k], a[k + 1], a[k + 2], w, cfg.padding, cfg.hidden_groups});
                       k += 3;
                     }
                     p.readout = {a[k], a[k + 1], a[k + 2], 1, 0, cfg.output_groups};
                     return encode(a[0], p, ForwardMode::eval()).values;
                   }});
  cases.push_back({"mpnn_aggregate",
                   [](Rng& r) {
                     MpnnConfig cfg{3, 2, 4, 0.0};
                     auto p = MpnnParams::init(cfg, r);
                     Inputs in;
                     for (int c = 0; c < 3; ++c) in.push_back(random_tensor({2, 3, 2}, r));
                     for (auto& np : p.named_parameters()) in.push_back(np.tensor);
                     return in;
                   },
                   [](Args a) {
                     MpnnParams p;
                     p.config = {3, 2, 4, 0.0};
                     p.message.push_back({a[3], a[4]});
                     p.message.push_back({a[5], a[6]});
                     p.readout_hidden = {a[7], a[8]};
                     p.readout_output = {a[9], a[10]};
                     std::vector<ChannelRepresentation> reps{{a[0], 0}, {a[1], 1}, {a[2], 2}};
                     return aggregate(reps, p, ForwardMode::eval());
                   }});
  return cases;
}

GradcheckCase broken_gradcheck_case() {
  return {"broken_square", [](Rng& r) { return Inputs{random_tensor({3, 2}, r)}; },
          [](Args a) {
            const Tensor& x = a[0];
            std::vector<double> out(x.numel());
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * x.data()[i];
            return detail::make_result(x.shape(), std::move(out), {x}, [x](detail::Node& self) {
              double* gx = detail::grad_target(x);
              if (!gx) return;
              // Wrong on purpose: d(x^2)/dx is 2x.
              for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += 3.0 * x.data()[i] * self.grad[i];
            });
          }};
}

GradcheckReport run_gradcheck(const GradcheckCase& c, const GradcheckOptions& options) {
  GradcheckReport report;
  report.name = c.name;
  Rng rng(derive_seed(options.seed, std::hash<std::string>{}(c.name)));
  try {
    for (std::size_t inst = 0; inst < options.instances; ++inst) {
      Inputs inputs = c.make_inputs(rng);
      for (auto& t : inputs) t.zero_grad();
      const Tensor probe = c.fn(inputs);
      Tensor direction;
      if (!(probe.rank() == 0)) {
        std::vector<double> d(probe.numel());
        for (auto& x : d) x = uniform(rng, -1.0, 1.0);
        direction = Tensor::from_data(probe.shape(), std::move(d));
      }
      project(c.fn(inputs), direction).backward();

      NoGradGuard guard;
      for (auto& input : inputs) {
        std::vector<double> analytic(input.numel(), 0.0);
        if (input.has_grad()) std::ranges::copy(input.grad(), analytic.begin());
        std::vector<double> numeric(input.numel());
        auto data = input.mutable_data();
        for (std::size_t i = 0; i < data.size(); ++i) {
          const double saved = data[i];
          data[i] = saved + options.step;
          const double up = project(c.fn(inputs), direction).item();
          data[i] = saved - options.step;
          const double down = project(c.fn(inputs), direction).item();
          data[i] = saved;
          numeric[i] = (up - down) / (2 * options.step);
        }
        std::vector<double> diff(analytic.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = analytic[i] - numeric[i];
        const double denom = std::max({l2(analytic), l2(numeric), 1e-8});
        report.max_relative_error = std::max(report.max_relative_error, l2(diff) / denom);
      }
      ++report.instances;
    }
    report.passed = report.max_relative_error <= options.tolerance && report.instances >= options.instances;
  } catch (const std::exception& e) {
    report.error = e.what();
    report.passed = false;
  }
  return report;
}

std::vector<OracleReport> run_loss_oracles(std::size_t instances, std::uint64_t seed, double tolerance) {
  std::vector<OracleReport> reports{{"nt_xent"}, {"ts2vec_dual"}, {"ts2vec_hierarchical"}, {"ts2vec"}, {"cocoa"}};
  Rng rng(derive_seed(seed, 0x0AC1E));
  NoGradGuard guard;
  auto pick_size = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const std::size_t n = pick_size(1, 4), v = pick_size(2, 3), t = pick_size(1, 4), l = pick_size(1, 6);
    const double tau = uniform(rng, 0.2, 2.0), lambda = uniform(rng, 0.0, 2.0);
    std::vector<Tensor> views;
    std::vector<reference::Matrix> flat;
    std::vector<reference::Sequence> seqs;
    for (std::size_t i = 0; i < v; ++i) {
      Tensor z = random_tensor({n, l, t}, rng);
      std::vector<double> raw(z.data().begin(), z.data().end());
      flat.push_back(reference::to_matrix(raw, n, l * t));
      seqs.push_back(reference::to_sequence(raw, n, l, t));
      views.push_back(z);
    }
    const Tensor zw = transpose(views[0], 1, 2), zv = transpose(views[1], 1, 2);
    const double got[] = {nt_xent(views, tau).item(), ts2vec_dual(zw, zv).item(), ts2vec_hierarchical(zw, zv).item(),
                          ts2vec(views, true).item(), cocoa(views, tau, lambda).item()};
    const double want[] = {reference::nt_xent(flat, tau), reference::ts2vec_dual(seqs[0], seqs[1]),
                           reference::ts2vec_hierarchical(seqs[0], seqs[1]), reference::ts2vec(seqs, true),
                           reference::cocoa(flat, tau, lambda)};
    for (std::size_t k = 0; k < reports.size(); ++k) {
      reports[k].max_abs_error = std::max(reports[k].max_abs_error, std::abs(got[k] - want[k]));
      if (!std::isfinite(got[k]) || !std::isfinite(want[k])) reports[k].max_abs_error = INFINITY;
      ++reports[k].instances;
    }
  }
  for (auto& r : reports) r.passed = r.max_abs_error <= tolerance;
  return reports;
}

}  // namespace mvts
