#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mvts/tensor.hpp"

namespace mvts {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

using ParameterList = std::vector<NamedParameter>;

std::vector<Tensor> tensors_of(const ParameterList& params);
void zero_grads(std::span<Tensor> params);

struct AdamWOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
};

struct AdamWState {
  AdamWOptions options;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::size_t step_count = 0;

  static AdamWState for_parameters(std::span<const Tensor> params, AdamWOptions options);
};

// One AdamW update with decoupled weight decay:
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta
// Parameters that received no gradient are left untouched.
void adamw_step(std::span<Tensor> params, AdamWState& state);

class AdamW {
 public:
  AdamW(std::vector<Tensor> params, AdamWOptions options);

  void zero_grad();
  void step();
  const AdamWState& state() const { return state_; }

 private:
  std::vector<Tensor> params_;
  AdamWState state_;
};

}  // namespace mvts
