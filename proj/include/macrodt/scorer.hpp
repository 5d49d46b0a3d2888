#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "macrodt/document.hpp"

namespace macrodt {

enum class Capability : uint8_t { segmentation = 1, coherence = 2, pointer = 4 };

const char* to_string(Capability c);

class Capabilities {
 public:
  constexpr Capabilities() = default;
  constexpr Capabilities(std::initializer_list<Capability> caps) {
    for (auto c : caps) bits_ |= static_cast<uint8_t>(c);
  }

  constexpr bool has(Capability c) const { return (bits_ & static_cast<uint8_t>(c)) != 0; }
  constexpr Capabilities& add(Capability c) {
    bits_ |= static_cast<uint8_t>(c);
    return *this;
  }
  constexpr uint8_t bits() const { return bits_; }

  friend constexpr bool operator==(Capabilities, Capabilities) = default;

 private:
  uint8_t bits_ = 0;
};

/// Per-boundary segmentation signal. `golden`, when present, marks gold topic
/// boundaries with 1. The final key orders boundaries golden-first, then by
/// segmentation probability.
struct BoundaryScores {
  std::vector<double> seg_prob;
  std::optional<std::vector<uint8_t>> golden;

  struct FinalKey {
    int golden = 0;
    double seg = 0.0;
    friend auto operator<=>(const FinalKey&, const FinalKey&) = default;
  };

  size_t size() const { return seg_prob.size(); }
  FinalKey final_key(size_t boundary) const;

  /// Copy with `golden` filled from the document's topic boundaries.
  BoundaryScores with_golden(const Document& doc) const;
};

/// Progress of the bidirectional pointer decoder. `merged` holds boundaries
/// given ranks 0, 1, ... in order; `split_committed` holds ranks n-2, n-3, ...
/// in order; `unassigned` is sorted ascending.
struct DecoderState {
  std::vector<int32_t> merged;
  std::vector<int32_t> split_committed;
  std::vector<int32_t> unassigned;

  static DecoderState initial(size_t boundary_count);
  bool complete() const { return unassigned.empty(); }
};

/// Combine (merge point) and split (split point) scores over the currently
/// unassigned boundaries.
struct ActionDistribution {
  std::map<int32_t, double> combine;
  std::map<int32_t, double> split;
};

enum class CoherenceLabel { coherent, incoherent };
enum class PointerAction { combine, split };
enum class TransitionAction { reduce, shift };

const char* to_string(PointerAction a);
const char* to_string(TransitionAction a);

/// Fixed correspondence between the segmentation label space and the two
/// tree-building action spaces:
///   coherent   <-> combine <-> reduce <-> 0
///   incoherent <-> split   <-> shift  <-> 1
struct LabelMapping {
  static constexpr int label(CoherenceLabel c) { return c == CoherenceLabel::coherent ? 0 : 1; }
  static constexpr int label(PointerAction a) { return a == PointerAction::combine ? 0 : 1; }
  static constexpr int label(TransitionAction a) { return a == TransitionAction::reduce ? 0 : 1; }

  static CoherenceLabel coherence_of(int label);
  static PointerAction pointer_action_of(int label);
  static TransitionAction transition_of(int label);
};

/// Source of the three signals tree builders consume. Backends implement the
/// do_* hooks; the public entry points check capability and preconditions
/// and validate what the backend returns.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual Capabilities capabilities() const = 0;

  /// True when one instance may serve concurrent callers. Backends holding
  /// per-connection state return false and must be confined to one worker.
  virtual bool shareable() const = 0;

  virtual std::string describe() const = 0;

  /// One probability in [0,1] per boundary of `doc`.
  BoundaryScores seg_scores(const Document& doc);

  /// Probability that `stack_top` and `queue_front` are coherent. Spans must
  /// be adjacent and in order; `stack_second` may be absent.
  double coherence(const Document& doc, std::optional<UnitSpan> stack_second, UnitSpan stack_top,
                   UnitSpan queue_front);

  /// Combine/split scores over exactly `state.unassigned`.
  ActionDistribution pointer_scores(const Document& doc, const DecoderState& state);

 protected:
  virtual std::vector<double> do_seg_prob(const Document& doc);
  virtual double do_coherence(const Document& doc, std::optional<UnitSpan> stack_second,
                              UnitSpan stack_top, UnitSpan queue_front);
  virtual ActionDistribution do_pointer(const Document& doc, const DecoderState& state);

  void require(Capability c) const;
};

using ScorerFactory = std::function<std::unique_ptr<Scorer>()>;
using FoldScorerFactory = std::function<std::unique_ptr<Scorer>(int fold)>;

}  // namespace macrodt
