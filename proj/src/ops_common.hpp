#pragma once

#include <string>

#include "mvts/error.hpp"
#include "mvts/tensor.hpp"

namespace mvts::detail {

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
}

inline void require_rank(const Tensor& a, std::size_t rank, const char* op) {
  if (a.rank() != rank)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                         shape_string(a.shape()));
}

inline void require_min_rank(const Tensor& a, std::size_t rank, const char* op) {
  if (a.rank() < rank)
    throw DimensionError(std::string(op) + ": expected rank >= " + std::to_string(rank) + ", got shape " +
                         shape_string(a.shape()));
}

}  // namespace mvts::detail
