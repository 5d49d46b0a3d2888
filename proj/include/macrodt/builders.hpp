#pragma once

#include <optional>
#include <vector>

#include "macrodt/ranking.hpp"
#include "macrodt/scorer.hpp"

namespace macrodt {

/// Top-down construction by descending segmentation probability. Works for
/// topic- or paragraph-trained scorers alike.
DiscourseTree result_convert(const Document& doc, Scorer& scorer);

/// Ways in which `tree` breaks the oracle constraints for `doc`: a node
/// splitting at a boundary inside a topic whose span still contains a topic
/// boundary, or a topic block that is not the span of some node. Empty when
/// the tree respects the topic structure.
std::vector<std::string> oracle_violations(const Document& doc, const DiscourseTree& tree);

/// Ranking used by oracle_annotate: gold topic boundaries first, each class
/// ordered by descending segmentation probability.
BoundaryRanking oracle_ranking(const Document& doc, const BoundaryScores& scores);

/// Top-down construction where gold topic boundaries always split before
/// any boundary inside a topic.
DiscourseTree oracle_annotate(const Document& doc, Scorer& scorer);

struct TransitionStep {
  TransitionAction action;
  std::optional<double> coherence;  // absent for forced actions
};

struct ShiftReduceResult {
  DiscourseTree tree;
  std::vector<TransitionStep> actions;
};

/// Arc-standard transitions. Shift while the stack holds fewer than two
/// subtrees, reduce once the queue is empty; otherwise reduce iff the
/// coherence of (stack top, queue front) reaches `threshold`.
ShiftReduceResult shift_reduce(const Document& doc, Scorer& scorer, double threshold = 0.5);

enum class BlinkMode { bidirectional, down_only, up_only };

const char* to_string(BlinkMode mode);

struct PointerStep {
  PointerAction action;
  int32_t boundary;
  double score;
};

struct BlinkResult {
  DiscourseTree tree;
  std::vector<PointerStep> actions;
  DecoderState final_state;
};

/// Pointer decoding that, at every step, either merges across the best
/// combine point (lowest remaining rank) or splits at the best split point
/// (highest remaining rank). Equal scores prefer combine; within combine
/// the higher boundary merges first, within split the lower boundary splits
/// first, matching the ranking tie rule.
BlinkResult blink_decode(const Document& doc, Scorer& scorer, BlinkMode mode = BlinkMode::bidirectional);

/// Total order induced by a finished decoder state.
BoundaryRanking ranking_from_state(const DecoderState& state, size_t boundary_count);

}  // namespace macrodt
