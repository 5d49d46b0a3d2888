#include "macrodt/scorer.hpp"

#include <cmath>

#include "macrodt/error.hpp"

namespace macrodt {

const char* to_string(Capability c) {
  switch (c) {
    case Capability::segmentation: return "segmentation";
    case Capability::coherence: return "coherence";
    case Capability::pointer: return "pointer";
  }
  return "?";
}

const char* to_string(PointerAction a) { return a == PointerAction::combine ? "combine" : "split"; }
const char* to_string(TransitionAction a) { return a == TransitionAction::reduce ? "reduce" : "shift"; }

namespace {
void check_label(int label) {
  if (label != 0 && label != 1) fail(ErrorKind::structural, "label must be 0 or 1, got " + std::to_string(label));
}
}  // namespace

CoherenceLabel LabelMapping::coherence_of(int label) {
  check_label(label);
  return label == 0 ? CoherenceLabel::coherent : CoherenceLabel::incoherent;
}

PointerAction LabelMapping::pointer_action_of(int label) {
  check_label(label);
  return label == 0 ? PointerAction::combine : PointerAction::split;
}

TransitionAction LabelMapping::transition_of(int label) {
  check_label(label);
  return label == 0 ? TransitionAction::reduce : TransitionAction::shift;
}

BoundaryScores::FinalKey BoundaryScores::final_key(size_t boundary) const {
  return {golden ? static_cast<int>((*golden)[boundary]) : 0, seg_prob[boundary]};
}

BoundaryScores BoundaryScores::with_golden(const Document& doc) const {
  BoundaryScores out = *this;
  std::vector<uint8_t> marks(seg_prob.size(), 0);
  for (auto b : doc.topic_boundaries)
    if (b >= 0 && static_cast<size_t>(b) < marks.size()) marks[static_cast<size_t>(b)] = 1;
  out.golden = std::move(marks);
  return out;
}

DecoderState DecoderState::initial(size_t boundary_count) {
  DecoderState s;
  s.unassigned.resize(boundary_count);
  for (size_t b = 0; b < boundary_count; ++b) s.unassigned[b] = static_cast<int32_t>(b);
  return s;
}

void Scorer::require(Capability c) const {
  if (!capabilities().has(c))
    fail(ErrorKind::capability, describe() + " does not provide " + to_string(c) + " scores");
}

BoundaryScores Scorer::seg_scores(const Document& doc) {
  require(Capability::segmentation);
  BoundaryScores out;
  out.seg_prob = do_seg_prob(doc);
  if (out.seg_prob.size() != doc.boundary_count())
    fail(ErrorKind::scorer, describe() + ": document '" + doc.id + "' needs " +
                                std::to_string(doc.boundary_count()) + " segmentation probabilities, got " +
                                std::to_string(out.seg_prob.size()));
  for (size_t b = 0; b < out.seg_prob.size(); ++b) {
    const double p = out.seg_prob[b];
    if (!(p >= 0.0 && p <= 1.0))
      fail(ErrorKind::scorer, describe() + ": document '" + doc.id + "' boundary " + std::to_string(b) +
                                  " has probability outside [0,1]");
  }
  return out;
}

double Scorer::coherence(const Document& doc, std::optional<UnitSpan> stack_second, UnitSpan stack_top,
                         UnitSpan queue_front) {
  require(Capability::coherence);
  const auto n = static_cast<int32_t>(doc.size());
  auto in_range = [n](UnitSpan s) { return s.first >= 0 && s.first <= s.last && s.last < n; };
  if (!in_range(stack_top) || !in_range(queue_front) || (stack_second && !in_range(*stack_second)))
    fail(ErrorKind::structural, "coherence: span outside document '" + doc.id + "'");
  if (stack_top.last + 1 != queue_front.first || (stack_second && stack_second->last + 1 != stack_top.first))
    fail(ErrorKind::structural, "coherence: spans are not adjacent and in order");
  const double p = do_coherence(doc, stack_second, stack_top, queue_front);
  if (!(p >= 0.0 && p <= 1.0))
    fail(ErrorKind::scorer, describe() + ": coherence outside [0,1] for document '" + doc.id + "'");
  return p;
}

ActionDistribution Scorer::pointer_scores(const Document& doc, const DecoderState& state) {
  require(Capability::pointer);
  if (state.unassigned.empty()) fail(ErrorKind::structural, "pointer_scores: no unassigned boundaries");
  auto dist = do_pointer(doc, state);
  auto matches = [&](const std::map<int32_t, double>& m) {
    if (m.size() != state.unassigned.size()) return false;
    size_t i = 0;
    for (const auto& [b, v] : m) {
      if (b != state.unassigned[i++] || std::isnan(v)) return false;
    }
    return true;
  };
  if (!matches(dist.combine) || !matches(dist.split))
    fail(ErrorKind::structural, describe() + ": pointer distribution domain differs from the unassigned "
                                             "boundaries of document '" + doc.id + "'");
  return dist;
}

std::vector<double> Scorer::do_seg_prob(const Document&) {
  require(Capability::segmentation);
  fail(ErrorKind::capability, describe() + " declares segmentation but does not implement it");
}

double Scorer::do_coherence(const Document&, std::optional<UnitSpan>, UnitSpan, UnitSpan) {
  require(Capability::coherence);
  fail(ErrorKind::capability, describe() + " declares coherence but does not implement it");
}

ActionDistribution Scorer::do_pointer(const Document&, const DecoderState&) {
  require(Capability::pointer);
  fail(ErrorKind::capability, describe() + " declares pointer but does not implement it");
}

}  // namespace macrodt
