#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include "mvts/encoder.hpp"
#include "mvts/mpnn.hpp"

namespace mvts {

enum class ViewStrategy { PerChannel, TwoGroup };

const char* to_string(ViewStrategy s);
ViewStrategy parse_view_strategy(const std::string& name);

// Disjoint split of channel indices; both groups hold at least two channels.
struct Partition {
  std::vector<std::size_t> group1;
  std::vector<std::size_t> group2;
  std::uint64_t seed = 0;
  std::uint64_t draw = 0;
};

struct ViewSet {
  std::vector<Tensor> views;  // each [N, L, T]
  ViewStrategy strategy = ViewStrategy::PerChannel;
  std::optional<Partition> partition;
};

// Every channel representation is its own view (C views, C(C-1)/2 pairs).
ViewSet per_channel_views(std::span<const ChannelRepresentation> reps);

// Group-1 size uniform on {2, ..., c-2}, then a uniform subset of that size.
Partition random_partition(std::size_t c, Rng& rng);

// Fresh partition per call, reproducible from the seed.
class PartitionSampler {
 public:
  explicit PartitionSampler(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  Partition next(std::size_t c);

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  Rng rng_;
};

// Two views, each the MPNN aggregate of one group, with shared parameters.
ViewSet two_group_views(std::span<const ChannelRepresentation> reps, const Partition& partition,
                        const MpnnParams& mpnn, ForwardMode mode);

}  // namespace mvts
