#include "macrodt/ranking.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "macrodt/error.hpp"

namespace macrodt {

BoundaryRanking::BoundaryRanking(std::vector<int64_t> ranks) : ranks_(std::move(ranks)) {
  std::unordered_set<int64_t> seen;
  seen.reserve(ranks_.size());
  for (size_t b = 0; b < ranks_.size(); ++b)
    if (!seen.insert(ranks_[b]).second)
      fail(ErrorKind::structural,
           "duplicate rank " + std::to_string(ranks_[b]) + " at boundary " + std::to_string(b));
}

BoundaryRanking BoundaryRanking::from_scores(std::span<const double> scores) {
  std::vector<int32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int32_t a, int32_t b) { return scores[a] > scores[b]; });
  return from_order(order);
}

BoundaryRanking BoundaryRanking::from_order(std::span<const int32_t> highest_first) {
  const auto m = static_cast<int64_t>(highest_first.size());
  std::vector<int64_t> ranks(highest_first.size(), -1);
  for (int64_t pos = 0; pos < m; ++pos) {
    const auto b = highest_first[static_cast<size_t>(pos)];
    if (b < 0 || b >= m || ranks[static_cast<size_t>(b)] != -1)
      fail(ErrorKind::structural, "boundary order is not a permutation");
    ranks[static_cast<size_t>(b)] = m - 1 - pos;
  }
  BoundaryRanking r;
  r.ranks_ = std::move(ranks);
  return r;
}

std::vector<int32_t> BoundaryRanking::descending() const {
  std::vector<int32_t> order(ranks_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) { return ranks_[a] > ranks_[b]; });
  return order;
}

namespace {

using NodeId = TreeBuilder::NodeId;

// Splits units [lo, hi] at the highest-ranked boundary in [lo, hi-1].
NodeId split_span(TreeBuilder& builder, const BoundaryRanking& ranking, int32_t lo, int32_t hi) {
  if (lo == hi) return builder.add_leaf(lo);
  int32_t best = lo;
  for (int32_t b = lo + 1; b < hi; ++b)
    if (ranking.rank(static_cast<size_t>(b)) > ranking.rank(static_cast<size_t>(best))) best = b;
  auto left = split_span(builder, ranking, lo, best);
  auto right = split_span(builder, ranking, best + 1, hi);
  return builder.add_internal(left, right);
}

NodeId merge_up(TreeBuilder& builder, const BoundaryRanking& ranking, int32_t n) {
  // segment_at_end[i] / segment_at_start[i]: node of the segment ending /
  // starting at unit i, or kNone when i is not a segment edge.
  std::vector<NodeId> at_start(static_cast<size_t>(n)), at_end(static_cast<size_t>(n));
  std::vector<int32_t> start_of_end(static_cast<size_t>(n)), end_of_start(static_cast<size_t>(n));
  for (int32_t i = 0; i < n; ++i) {
    auto id = builder.add_leaf(i);
    at_start[static_cast<size_t>(i)] = at_end[static_cast<size_t>(i)] = id;
    start_of_end[static_cast<size_t>(i)] = end_of_start[static_cast<size_t>(i)] = i;
  }
  auto order = ranking.descending();
  NodeId last = at_start[0];
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto b = static_cast<size_t>(*it);
    const NodeId left = at_end[b];
    const NodeId right = at_start[b + 1];
    const int32_t lo = start_of_end[b];
    const int32_t hi = end_of_start[b + 1];
    last = builder.add_internal(left, right);
    at_start[static_cast<size_t>(lo)] = last;
    at_end[static_cast<size_t>(hi)] = last;
    end_of_start[static_cast<size_t>(lo)] = hi;
    start_of_end[static_cast<size_t>(hi)] = lo;
  }
  return last;
}

}  // namespace

DiscourseTree tree_from_ranks(size_t leaf_count, const BoundaryRanking& ranking, Direction direction) {
  if (leaf_count == 0) fail(ErrorKind::structural, "tree_from_ranks: leaf count must be at least 1");
  if (ranking.size() != leaf_count - 1)
    fail(ErrorKind::structural, "tree_from_ranks: ranking covers " + std::to_string(ranking.size()) +
                                    " boundaries, expected " + std::to_string(leaf_count - 1));
  const auto n = static_cast<int32_t>(leaf_count);
  TreeBuilder builder(leaf_count);
  NodeId root = direction == Direction::top_down ? split_span(builder, ranking, 0, n - 1)
                                                 : merge_up(builder, ranking, n);
  return std::move(builder).finish(root);
}

BoundaryRanking ranks_from_tree(const DiscourseTree& tree) {
  const auto problems = validate(tree, tree.leaf_count());
  if (!problems.empty()) fail(ErrorKind::structural, "ranks_from_tree: " + problems.front());
  const auto m = static_cast<int64_t>(tree.internal_count());
  std::vector<int64_t> ranks(static_cast<size_t>(m));
  int64_t position = 0;
  std::vector<DiscourseTree::NodeId> stack{tree.root_id()};
  while (!stack.empty()) {
    auto id = stack.back();
    stack.pop_back();
    const auto& n = tree.node(id);
    if (n.is_leaf()) continue;
    ranks[static_cast<size_t>(tree.split_boundary(id))] = m - 1 - position++;
    stack.push_back(n.right);
    stack.push_back(n.left);
  }
  return BoundaryRanking(std::move(ranks));
}

}  // namespace macrodt
