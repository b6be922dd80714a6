#include "mvts/optim.hpp"

#include <cmath>

#include "mvts/error.hpp"

namespace mvts {

std::vector<Tensor> tensors_of(const ParameterList& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

void zero_grads(std::span<Tensor> params) {
  for (auto& p : params) p.zero_grad();
}

AdamWState AdamWState::for_parameters(std::span<const Tensor> params, AdamWOptions options) {
  AdamWState s;
  s.options = options;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.numel(), 0.0);
    s.second_moment.emplace_back(p.numel(), 0.0);
  }
  return s;
}

void adamw_step(std::span<Tensor> params, AdamWState& state) {
  if (params.size() != state.first_moment.size())
    throw DimensionError("adamw_step: optimizer state tracks " + std::to_string(state.first_moment.size()) +
                         " parameters, got " + std::to_string(params.size()));
  const auto& o = state.options;
  ++state.step_count;
  const double t = double(state.step_count);
  const double bias1 = 1.0 - std::pow(o.beta1, t);
  const double bias2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& param = params[p];
    if (!param.has_grad()) continue;
    auto theta = param.mutable_data();
    const auto g = param.grad();
    auto& m = state.first_moment[p];
    auto& v = state.second_moment[p];
    if (m.size() != theta.size()) throw DimensionError("adamw_step: moment shape does not match parameter");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      theta[i] = theta[i] - o.lr * m_hat / (std::sqrt(v_hat) + o.eps) - o.lr * o.weight_decay * theta[i];
    }
  }
}

AdamW::AdamW(std::vector<Tensor> params, AdamWOptions options)
    : params_(std::move(params)), state_(AdamWState::for_parameters(params_, options)) {}

void AdamW::zero_grad() { zero_grads(params_); }

void AdamW::step() { adamw_step(params_, state_); }

}  // namespace mvts
