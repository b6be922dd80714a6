#include "mvts/layers.hpp"

#include <cmath>

#include "mvts/ops.hpp"

namespace mvts {

Tensor init_fan_in_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(double(fan_in));
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) v = uniform(rng, -bound, bound);
  return Tensor::from_data(std::move(shape), std::move(values), true);
}

LinearLayer LinearLayer::init(std::size_t in, std::size_t out, Rng& rng) {
  return {init_fan_in_uniform({in, out}, in, rng), Tensor::zeros({out}, true)};
}

Tensor LinearLayer::operator()(const Tensor& x) const { return linear(x, weight, bias); }

void LinearLayer::append_parameters(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

}  // namespace mvts
