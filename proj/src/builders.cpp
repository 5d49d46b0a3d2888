#include "macrodt/builders.hpp"

#include <algorithm>
#include <numeric>

#include "macrodt/error.hpp"

namespace macrodt {

const char* to_string(BlinkMode mode) {
  switch (mode) {
    case BlinkMode::bidirectional: return "bi";
    case BlinkMode::down_only: return "down";
    case BlinkMode::up_only: return "up";
  }
  return "bi";
}

namespace {
void require_units(const Document& doc) {
  if (doc.units.empty()) fail(ErrorKind::data, "document '" + doc.id + "' has no units");
}
}  // namespace

DiscourseTree result_convert(const Document& doc, Scorer& scorer) {
  require_units(doc);
  const auto scores = scorer.seg_scores(doc);
  return tree_from_ranks(doc.size(), BoundaryRanking::from_scores(scores.seg_prob));
}

BoundaryRanking oracle_ranking(const Document& doc, const BoundaryScores& scores) {
  const auto keyed = scores.golden ? scores : scores.with_golden(doc);
  std::vector<int32_t> order(keyed.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
    return keyed.final_key(static_cast<size_t>(a)) > keyed.final_key(static_cast<size_t>(b));
  });
  return BoundaryRanking::from_order(order);
}

std::vector<std::string> oracle_violations(const Document& doc, const DiscourseTree& tree) {
  std::vector<std::string> out;
  if (auto problems = validate(tree, doc.size()); !problems.empty()) {
    out.push_back("invalid tree: " + problems.front());
    return out;
  }
  std::vector<UnitSpan> spans;
  for (DiscourseTree::NodeId id = 0; id <= tree.root_id(); ++id) {
    const auto& n = tree.node(id);
    spans.push_back(n.span);
    if (n.is_leaf()) continue;
    const auto b = tree.split_boundary(id);
    if (doc.is_topic_boundary(b)) continue;
    auto first = std::lower_bound(doc.topic_boundaries.begin(), doc.topic_boundaries.end(), n.span.first);
    if (first != doc.topic_boundaries.end() && *first < n.span.last)
      out.push_back("split at in-topic boundary " + std::to_string(b) + " spans topic boundary " +
                    std::to_string(*first));
  }
  std::sort(spans.begin(), spans.end());
  for (const auto& block : doc.topic_blocks())
    if (!std::binary_search(spans.begin(), spans.end(), block))
      out.push_back("topic block " + std::to_string(block.first) + ".." + std::to_string(block.last) +
                    " is not a tree span");
  return out;
}

DiscourseTree oracle_annotate(const Document& doc, Scorer& scorer) {
  require_units(doc);
  const auto scores = scorer.seg_scores(doc).with_golden(doc);
  return tree_from_ranks(doc.size(), oracle_ranking(doc, scores));
}

ShiftReduceResult shift_reduce(const Document& doc, Scorer& scorer, double threshold) {
  require_units(doc);
  struct Entry {
    TreeBuilder::NodeId node;
    UnitSpan span;
  };
  const auto n = static_cast<int32_t>(doc.size());
  TreeBuilder builder(doc.size());
  std::vector<Entry> stack;
  int32_t next = 0;  // queue front
  ShiftReduceResult out;
  out.actions.reserve(2 * doc.size() - 1);

  auto shift = [&](std::optional<double> p) {
    stack.push_back({builder.add_leaf(next), {next, next}});
    ++next;
    out.actions.push_back({TransitionAction::shift, p});
  };
  auto reduce = [&](std::optional<double> p) {
    auto right = stack.back();
    stack.pop_back();
    auto left = stack.back();
    stack.pop_back();
    stack.push_back({builder.add_internal(left.node, right.node), {left.span.first, right.span.last}});
    out.actions.push_back({TransitionAction::reduce, p});
  };

  while (next < n || stack.size() > 1) {
    if (stack.size() < 2) {
      shift(std::nullopt);
    } else if (next >= n) {
      reduce(std::nullopt);
    } else {
      const auto& top = stack.back();
      const auto& second = stack[stack.size() - 2];
      const double p = scorer.coherence(doc, second.span, top.span, {next, next});
      const int label = p >= threshold ? LabelMapping::label(CoherenceLabel::coherent)
                                       : LabelMapping::label(CoherenceLabel::incoherent);
      if (LabelMapping::transition_of(label) == TransitionAction::reduce)
        reduce(p);
      else
        shift(p);
    }
  }
  out.tree = std::move(builder).finish(stack.back().node);
  return out;
}

BoundaryRanking ranking_from_state(const DecoderState& state, size_t boundary_count) {
  if (!state.unassigned.empty()) fail(ErrorKind::structural, "decoder state still has unassigned boundaries");
  if (state.merged.size() + state.split_committed.size() != boundary_count)
    fail(ErrorKind::structural, "decoder state does not cover every boundary");
  std::vector<int32_t> highest_first(state.split_committed.begin(), state.split_committed.end());
  highest_first.insert(highest_first.end(), state.merged.rbegin(), state.merged.rend());
  return BoundaryRanking::from_order(highest_first);
}

BlinkResult blink_decode(const Document& doc, Scorer& scorer, BlinkMode mode) {
  require_units(doc);
  BlinkResult out;
  auto& state = out.final_state;
  state = DecoderState::initial(doc.boundary_count());

  while (!state.complete()) {
    const auto dist = scorer.pointer_scores(doc, state);
    std::optional<PointerStep> best;
    auto better = [&](double score) { return !best || score > best->score; };

    if (mode != BlinkMode::down_only) {
      // Descending boundary order so that, among equal scores, the higher
      // boundary merges first and the lower one keeps the higher rank.
      for (auto it = dist.combine.rbegin(); it != dist.combine.rend(); ++it)
        if (better(it->second)) best = PointerStep{PointerAction::combine, it->first, it->second};
    }
    if (mode != BlinkMode::up_only) {
      for (const auto& [b, score] : dist.split)
        if (better(score)) best = PointerStep{PointerAction::split, b, score};
    }
    if (!best) fail(ErrorKind::structural, "pointer distribution for '" + doc.id + "' is empty");

    auto pos = std::lower_bound(state.unassigned.begin(), state.unassigned.end(), best->boundary);
    if (pos == state.unassigned.end() || *pos != best->boundary)
      fail(ErrorKind::structural, "decoder picked boundary " + std::to_string(best->boundary) +
                                      " which is not unassigned");
    state.unassigned.erase(pos);
    if (best->action == PointerAction::combine)
      state.merged.push_back(best->boundary);
    else
      state.split_committed.push_back(best->boundary);
    out.actions.push_back(*best);
  }
  out.tree = tree_from_ranks(doc.size(), ranking_from_state(state, doc.boundary_count()));
  return out;
}

}  // namespace macrodt
