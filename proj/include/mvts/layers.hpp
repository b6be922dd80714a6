#pragma once

#include <cstddef>
#include <string>

#include "mvts/optim.hpp"
#include "mvts/random.hpp"
#include "mvts/tensor.hpp"

namespace mvts {

// Train/eval switch plus the generator that feeds dropout in training.
struct ForwardMode {
  bool train = false;
  Rng* rng = nullptr;

  static ForwardMode eval() { return {}; }
  static ForwardMode training(Rng& rng) { return {true, &rng}; }
};

// Weights drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor init_fan_in_uniform(Shape shape, std::size_t fan_in, Rng& rng);

// Affine map along the last axis; weight is [in, out].
struct LinearLayer {
  Tensor weight;
  Tensor bias;

  static LinearLayer init(std::size_t in, std::size_t out, Rng& rng);
  Tensor operator()(const Tensor& x) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;
};

}  // namespace mvts
