#pragma once

#include <cstdint>
#include <vector>

#include "useembed/dataset.hpp"

namespace useembed {

// Per-class instance counts for a train/validation/test split.
struct SplitCounts {
  int train = 0;
  int val = 0;
  int test = 0;
};

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Seeded random split drawing the requested number of instances per class.
// Throws ValidationError when a class has fewer instances than requested.
SplitIndices split_per_class(const Dataset& dataset, const SplitCounts& counts,
                             std::uint64_t seed);

// Dataset restricted to the given instance rows (taxonomy and attributes
// shared unchanged).
Dataset subset(const Dataset& dataset, const std::vector<int>& indices);

// Dataset restricted to the given leaf categories. Leaves are renumbered
// densely in their original order; all supercategories are kept.
Dataset restrict_to_leaves(const Dataset& dataset, const std::vector<NodeId>& keep_leaves);

}  // namespace useembed
