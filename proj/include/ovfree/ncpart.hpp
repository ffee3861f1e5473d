#pragma once

// Non-crossing partitions of {0, ..., n-1} and the nesting forest used to
// evaluate operator-valued cumulant products.

#include <cstddef>
#include <optional>
#include <vector>

namespace ovfree {

inline constexpr std::size_t kMaxPartitionSize = 12;

struct NCPartition {
  std::size_t n = 0;
  /// Increasing element lists, ordered by their first element.
  std::vector<std::vector<std::size_t>> blocks;

  bool operator==(const NCPartition&) const = default;
  auto operator<=>(const NCPartition& other) const { return blocks <=> other.blocks; }
};

/// All non-crossing partitions of an n-element set, lexicographically
/// ordered by block lists. Requires 1 <= n <= 12.
std::vector<NCPartition> enumerate_nc(std::size_t n);

struct NestingNode {
  std::optional<std::size_t> parent;
  /// Gap of the parent block this block sits in: between parent elements
  /// gap and gap + 1. Meaningless for roots.
  std::size_t gap = 0;
  /// children[g] lists the blocks nested directly in gap g, left to right.
  std::vector<std::vector<std::size_t>> children;
};

/// Evaluation plan for a partition: node i describes block i.
struct EvaluationPlan {
  std::vector<NestingNode> nodes;
  /// Outermost blocks, left to right.
  std::vector<std::size_t> roots;
  /// Children before parents.
  std::vector<std::size_t> post_order;
};

EvaluationPlan nesting_forest(const NCPartition& p);

}  // namespace ovfree
