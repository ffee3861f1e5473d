#include "ovfree/ncpart.hpp"

#include "ovfree/algebra.hpp"

#include <algorithm>
#include <functional>

namespace ovfree {

namespace {

using Blocks = std::vector<std::vector<std::size_t>>;

// Non-crossing partitions of the interval [lo, hi). The block containing lo
// splits the rest into independent intervals: the gaps between its elements
// and the tail after its last element.
std::vector<Blocks> partitions_of(std::size_t lo, std::size_t hi) {
  if (lo >= hi) return {Blocks{}};
  std::vector<Blocks> out;
  // Choose the remaining elements of lo's block as a subset of (lo, hi).
  const std::size_t span = hi - lo - 1;
  for (std::size_t mask = 0; mask < (std::size_t{1} << span); ++mask) {
    std::vector<std::size_t> first{lo};
    for (std::size_t b = 0; b < span; ++b)
      if (mask & (std::size_t{1} << b)) first.push_back(lo + 1 + b);

    std::vector<std::pair<std::size_t, std::size_t>> intervals;
    for (std::size_t i = 0; i + 1 < first.size(); ++i)
      if (first[i] + 1 < first[i + 1]) intervals.emplace_back(first[i] + 1, first[i + 1]);
    if (first.back() + 1 < hi) intervals.emplace_back(first.back() + 1, hi);

    std::vector<Blocks> partial{Blocks{first}};
    for (auto [a, b] : intervals) {
      const auto sub = partitions_of(a, b);
      std::vector<Blocks> next;
      next.reserve(partial.size() * sub.size());
      for (const auto& head : partial)
        for (const auto& tail : sub) {
          Blocks merged = head;
          merged.insert(merged.end(), tail.begin(), tail.end());
          next.push_back(std::move(merged));
        }
      partial = std::move(next);
    }
    for (auto& blocks : partial) out.push_back(std::move(blocks));
  }
  return out;
}

}  // namespace

std::vector<NCPartition> enumerate_nc(std::size_t n) {
  if (n < 1 || n > kMaxPartitionSize)
    throw InputError("enumerate_nc: n must lie in [1, " + std::to_string(kMaxPartitionSize) + "], got " +
                     std::to_string(n));
  std::vector<NCPartition> out;
  for (auto& blocks : partitions_of(0, n)) {
    std::sort(blocks.begin(), blocks.end());
    out.push_back(NCPartition{n, std::move(blocks)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

EvaluationPlan nesting_forest(const NCPartition& p) {
  EvaluationPlan plan;
  const std::size_t nb = p.blocks.size();
  plan.nodes.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) plan.nodes[b].children.resize(p.blocks[b].size() - 1);

  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t first = p.blocks[b].front();
    // Innermost enclosing gap: the candidate whose left endpoint is largest.
    std::optional<std::size_t> best;
    std::size_t best_gap = 0;
    std::size_t best_left = 0;
    for (std::size_t c = 0; c < nb; ++c) {
      if (c == b) continue;
      const auto& blk = p.blocks[c];
      for (std::size_t g = 0; g + 1 < blk.size(); ++g)
        if (blk[g] < first && first < blk[g + 1] && (!best || blk[g] > best_left)) {
          best = c;
          best_gap = g;
          best_left = blk[g];
        }
    }
    plan.nodes[b].parent = best;
    plan.nodes[b].gap = best_gap;
  }

  // Blocks are ordered by first element, so appending keeps siblings sorted.
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& node = plan.nodes[b];
    if (node.parent)
      plan.nodes[*node.parent].children[node.gap].push_back(b);
    else
      plan.roots.push_back(b);
  }

  std::function<void(std::size_t)> visit = [&](std::size_t b) {
    for (const auto& gap : plan.nodes[b].children)
      for (std::size_t c : gap) visit(c);
    plan.post_order.push_back(b);
  };
  for (std::size_t r : plan.roots) visit(r);
  return plan;
}

}  // namespace ovfree
