#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mvts/random.hpp"
#include "mvts/tensor.hpp"

namespace mvts {

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  std::size_t instances = 20;
  std::uint64_t seed = 0;
};

// A differentiable function of freshly drawn inputs. Non-scalar outputs are
// projected onto a fixed random direction before differentiation.
struct GradcheckCase {
  std::string name;
  std::function<std::vector<Tensor>(Rng&)> make_inputs;
  std::function<Tensor(std::span<const Tensor>)> fn;
};

struct GradcheckReport {
  std::string name;
  std::size_t instances = 0;
  // Max over instances and inputs of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8), norm-wise.
  double max_relative_error = 0;
  bool passed = false;
  std::string error;  // exception text when the case threw
};

// Every differentiable op, the three losses, and small encoder/MPNN stacks.
std::vector<GradcheckCase> gradcheck_cases();
// An op whose backward is deliberately wrong by a factor; the checker must flag it.
GradcheckCase broken_gradcheck_case();

GradcheckReport run_gradcheck(const GradcheckCase& c, const GradcheckOptions& options);

struct OracleReport {
  std::string name;
  std::size_t instances = 0;
  double max_abs_error = 0;
  bool passed = false;
};

// Batched losses against the direct-summation references on random instances
// with N <= 4, V <= 3, T <= 4, L <= 6.
std::vector<OracleReport> run_loss_oracles(std::size_t instances = 100, std::uint64_t seed = 0,
                                           double tolerance = 1e-9);

}  // namespace mvts
