#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace macrodt {

/// Inclusive range of unit indices covered by a tree node.
struct UnitSpan {
  int32_t first = 0;
  int32_t last = 0;

  int32_t size() const { return last - first + 1; }
  friend bool operator==(const UnitSpan&, const UnitSpan&) = default;
  friend auto operator<=>(const UnitSpan&, const UnitSpan&) = default;
};

/// Strictly binary tree over discourse units.
///
/// Nodes live in a flat arena in post-order, so the root is always the last
/// node and children always precede their parent. A tree is immutable once
/// built; use TreeBuilder to assemble one bottom-up.
class DiscourseTree {
 public:
  using NodeId = int32_t;
  static constexpr NodeId kNone = -1;

  struct Node {
    NodeId left = kNone;
    NodeId right = kNone;
    int32_t leaf = -1;  // unit index for leaves, -1 for internal nodes
    UnitSpan span;

    bool is_leaf() const { return left == kNone; }
  };

  DiscourseTree() = default;

  static DiscourseTree single_leaf(int32_t unit);

  /// Parses the text form, e.g. "((0 1) ((2 3) 4))". Rejects non-binary
  /// brackets with a structural error; leaf indices are not range-checked
  /// here (see validate()).
  static DiscourseTree parse(std::string_view text);

  /// Text form with single-space separators.
  std::string to_string() const;

  bool empty() const { return nodes_.empty(); }
  NodeId root_id() const { return static_cast<NodeId>(nodes_.size()) - 1; }
  const Node& root() const { return nodes_.back(); }
  const Node& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }
  std::span<const Node> nodes() const { return nodes_; }

  size_t leaf_count() const { return (nodes_.size() + 1) / 2; }
  size_t internal_count() const { return nodes_.size() / 2; }

  /// Leaf unit indices in left-to-right order.
  std::vector<int32_t> leaves() const;

  /// Spans of all internal nodes, in post-order.
  std::vector<UnitSpan> internal_spans() const;

  /// Boundary at which an internal node splits: the last unit of its left
  /// child. Boundary b lies between unit b and unit b+1.
  int32_t split_boundary(NodeId id) const;

  friend bool operator==(const DiscourseTree& a, const DiscourseTree& b);

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
};

/// Accumulates nodes for a DiscourseTree. Ids returned by add_* are only
/// meaningful to this builder.
class TreeBuilder {
 public:
  using NodeId = DiscourseTree::NodeId;

  explicit TreeBuilder(size_t leaf_hint = 0);

  NodeId add_leaf(int32_t unit);
  NodeId add_internal(NodeId left, NodeId right);

  /// Re-lays the arena in post-order under `root` and returns the tree.
  DiscourseTree finish(NodeId root) &&;

 private:
  std::vector<DiscourseTree::Node> nodes_;
};

std::string to_string(const DiscourseTree& tree);

/// Parenthesized shape with every leaf rendered as "\u00b7"; equal strings
/// mean equal shapes.
std::string shape_signature(const DiscourseTree& tree);

/// Checks a tree against an expected leaf count. Returns every violation
/// found; an empty list means the tree is valid.
std::vector<std::string> validate(const DiscourseTree& tree, size_t leaf_count);

}  // namespace macrodt
