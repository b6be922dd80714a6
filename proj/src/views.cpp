#include "mvts/views.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "mvts/error.hpp"

namespace mvts {

const char* to_string(ViewStrategy s) { return s == ViewStrategy::PerChannel ? "per_channel" : "two_group"; }

ViewStrategy parse_view_strategy(const std::string& name) {
  if (name == "per_channel") return ViewStrategy::PerChannel;
  if (name == "two_group") return ViewStrategy::TwoGroup;
  throw ConfigError("unknown view strategy '" + name + "' (expected per_channel or two_group)");
}

ViewSet per_channel_views(std::span<const ChannelRepresentation> reps) {
  if (reps.size() < 2)
    throw ConfigError("per-channel views need at least 2 channels to form a positive pair, got " +
                      std::to_string(reps.size()));
  ViewSet set;
  set.strategy = ViewStrategy::PerChannel;
  for (const auto& r : reps) set.views.push_back(r.values);
  return set;
}

Partition random_partition(std::size_t c, Rng& rng) {
  if (c < 4)
    throw ConfigError("two-group partition needs at least 4 channels, got " + std::to_string(c) +
                      "; use the per_channel strategy");
  const std::size_t size1 = std::uniform_int_distribution<std::size_t>(2, c - 2)(rng);
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: the first size1 entries are a uniform subset.
  for (std::size_t i = 0; i < size1; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, c - 1)(rng);
    std::swap(order[i], order[j]);
  }
  Partition p;
  p.group1.assign(order.begin(), order.begin() + size1);
  p.group2.assign(order.begin() + size1, order.end());
  std::sort(p.group1.begin(), p.group1.end());
  std::sort(p.group2.begin(), p.group2.end());
  return p;
}

Partition PartitionSampler::next(std::size_t c) {
  Partition p = random_partition(c, rng_);
  p.seed = seed_;
  p.draw = draws_++;
  return p;
}

ViewSet two_group_views(std::span<const ChannelRepresentation> reps, const Partition& partition,
                        const MpnnParams& mpnn, ForwardMode mode) {
  const std::size_t c = reps.size();
  std::vector<int> seen(c, 0);
  for (const auto* g : {&partition.group1, &partition.group2}) {
    if (g->size() < 2) throw ConfigError("partition groups must hold at least 2 channels");
    for (auto i : *g) {
      if (i >= c) throw ConfigError("partition refers to channel " + std::to_string(i) + " of " + std::to_string(c));
      ++seen[i];
    }
  }
  for (int s : seen)
    if (s != 1) throw ConfigError("partition must cover every channel exactly once");

  auto gather = [&](const std::vector<std::size_t>& idx) {
    std::vector<ChannelRepresentation> g;
    for (auto i : idx) g.push_back(reps[i]);
    return g;
  };
  ViewSet set;
  set.strategy = ViewStrategy::TwoGroup;
  set.partition = partition;
  set.views.push_back(aggregate(gather(partition.group1), mpnn, mode));
  set.views.push_back(aggregate(gather(partition.group2), mpnn, mode));
  return set;
}

}  // namespace mvts
