#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "macrodt/tree.hpp"

namespace macrodt {

/// Total order over the n-1 boundaries of an n-unit sequence. A higher rank
/// splits earlier (top-down) and merges later (bottom-up).
class BoundaryRanking {
 public:
  BoundaryRanking() = default;

  /// Takes arbitrary pairwise-distinct rank values, one per boundary.
  explicit BoundaryRanking(std::vector<int64_t> ranks);

  /// Ranks boundaries by descending score. Equal scores give the lower
  /// boundary index the higher rank.
  static BoundaryRanking from_scores(std::span<const double> scores);

  /// Ranks boundaries listed from highest to lowest rank. `order` must be a
  /// permutation of [0, order.size()).
  static BoundaryRanking from_order(std::span<const int32_t> highest_first);

  size_t size() const { return ranks_.size(); }
  int64_t rank(size_t boundary) const { return ranks_[boundary]; }
  std::span<const int64_t> ranks() const { return ranks_; }

  /// Boundaries sorted from highest to lowest rank.
  std::vector<int32_t> descending() const;

  friend bool operator==(const BoundaryRanking&, const BoundaryRanking&) = default;

 private:
  std::vector<int64_t> ranks_;
};

enum class Direction { top_down, bottom_up };

/// Builds the unique binary tree consistent with a boundary ranking. top_down
/// splits every span at its highest-ranked internal boundary; bottom_up
/// merges across the lowest-ranked remaining boundary. Both yield the same
/// tree.
DiscourseTree tree_from_ranks(size_t leaf_count, const BoundaryRanking& ranking,
                              Direction direction = Direction::top_down);

/// Inverse of tree_from_ranks: pre-order position p of a split maps to rank
/// n-2-p.
BoundaryRanking ranks_from_tree(const DiscourseTree& tree);

}  // namespace macrodt
