#include "macrodt/tree.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "macrodt/error.hpp"

namespace macrodt {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::structural: return "structural error";
    case ErrorKind::capability: return "capability error";
    case ErrorKind::config: return "config error";
    case ErrorKind::data: return "data error";
    case ErrorKind::scorer: return "scorer error";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

TreeBuilder::TreeBuilder(size_t leaf_hint) {
  if (leaf_hint > 0) nodes_.reserve(2 * leaf_hint - 1);
}

TreeBuilder::NodeId TreeBuilder::add_leaf(int32_t unit) {
  DiscourseTree::Node n;
  n.leaf = unit;
  n.span = {unit, unit};
  nodes_.push_back(n);
  return static_cast<NodeId>(nodes_.size()) - 1;
}

TreeBuilder::NodeId TreeBuilder::add_internal(NodeId left, NodeId right) {
  const auto count = static_cast<NodeId>(nodes_.size());
  if (left < 0 || right < 0 || left >= count || right >= count || left == right)
    fail(ErrorKind::structural, "tree builder: invalid child ids");
  DiscourseTree::Node n;
  n.left = left;
  n.right = right;
  n.span = {nodes_[static_cast<size_t>(left)].span.first,
            nodes_[static_cast<size_t>(right)].span.last};
  nodes_.push_back(n);
  return count;
}

DiscourseTree TreeBuilder::finish(NodeId root) && {
  if (root < 0 || root >= static_cast<NodeId>(nodes_.size()))
    fail(ErrorKind::structural, "tree builder: invalid root id");

  DiscourseTree tree;
  tree.nodes_.reserve(nodes_.size());
  std::vector<NodeId> remap(nodes_.size(), DiscourseTree::kNone);

  // Iterative post-order walk from the root.
  std::vector<std::pair<NodeId, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    const auto& src = nodes_[static_cast<size_t>(id)];
    if (src.is_leaf() || expanded) {
      if (remap[static_cast<size_t>(id)] != DiscourseTree::kNone)
        fail(ErrorKind::structural, "tree builder: node reachable twice");
      DiscourseTree::Node out = src;
      if (!src.is_leaf()) {
        out.left = remap[static_cast<size_t>(src.left)];
        out.right = remap[static_cast<size_t>(src.right)];
        out.span = {tree.nodes_[static_cast<size_t>(out.left)].span.first,
                    tree.nodes_[static_cast<size_t>(out.right)].span.last};
      }
      remap[static_cast<size_t>(id)] = static_cast<NodeId>(tree.nodes_.size());
      tree.nodes_.push_back(out);
    } else {
      stack.push_back({id, true});
      stack.push_back({src.right, false});
      stack.push_back({src.left, false});
    }
  }
  return tree;
}

DiscourseTree DiscourseTree::single_leaf(int32_t unit) {
  TreeBuilder b(1);
  auto id = b.add_leaf(unit);
  return std::move(b).finish(id);
}

namespace {

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : text_(text) {}

  DiscourseTree run() {
    TreeBuilder builder;
    skip_space();
    auto root = parse_node(builder);
    skip_space();
    if (pos_ != text_.size()) error("trailing characters");
    return std::move(builder).finish(root);
  }

 private:
  TreeBuilder::NodeId parse_node(TreeBuilder& builder) {
    skip_space();
    if (pos_ >= text_.size()) error("unexpected end of input");
    if (text_[pos_] == '(') {
      ++pos_;
      std::vector<TreeBuilder::NodeId> children;
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) error("unbalanced '('");
        if (text_[pos_] == ')') {
          ++pos_;
          break;
        }
        children.push_back(parse_node(builder));
      }
      if (children.size() != 2)
        error("non-binary node with " + std::to_string(children.size()) + " children");
      return builder.add_internal(children[0], children[1]);
    }
    int32_t value = 0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin || value < 0) error("expected leaf index");
    pos_ += static_cast<size_t>(ptr - begin);
    if (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
        text_[pos_] != '(' && text_[pos_] != ')')
      error("malformed leaf index");
    return builder.add_leaf(value);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::structural,
         "tree text at offset " + std::to_string(pos_) + ": " + what);
  }

  std::string_view text_;
  size_t pos_ = 0;
};

void render(const DiscourseTree& tree, DiscourseTree::NodeId id, bool shape, std::string& out) {
  const auto& n = tree.node(id);
  if (n.is_leaf()) {
    out += shape ? std::string("·") : std::to_string(n.leaf);
    return;
  }
  out += '(';
  render(tree, n.left, shape, out);
  if (!shape) out += ' ';
  render(tree, n.right, shape, out);
  out += ')';
}

}  // namespace

DiscourseTree DiscourseTree::parse(std::string_view text) { return TreeParser(text).run(); }

std::string DiscourseTree::to_string() const {
  std::string out;
  if (!empty()) render(*this, root_id(), false, out);
  return out;
}

std::string to_string(const DiscourseTree& tree) { return tree.to_string(); }

std::vector<int32_t> DiscourseTree::leaves() const {
  std::vector<int32_t> out;
  out.reserve(leaf_count());
  for (const auto& n : nodes_)
    if (n.is_leaf()) out.push_back(n.leaf);
  return out;
}

std::vector<UnitSpan> DiscourseTree::internal_spans() const {
  std::vector<UnitSpan> out;
  out.reserve(internal_count());
  for (const auto& n : nodes_)
    if (!n.is_leaf()) out.push_back(n.span);
  return out;
}

int32_t DiscourseTree::split_boundary(NodeId id) const {
  const auto& n = node(id);
  if (n.is_leaf()) fail(ErrorKind::structural, "leaf has no split boundary");
  return node(n.left).span.last;
}

bool operator==(const DiscourseTree& a, const DiscourseTree& b) {
  if (a.nodes_.size() != b.nodes_.size()) return false;
  for (size_t i = 0; i < a.nodes_.size(); ++i) {
    const auto& x = a.nodes_[i];
    const auto& y = b.nodes_[i];
    if (x.left != y.left || x.right != y.right || x.leaf != y.leaf) return false;
  }
  return true;
}

std::string shape_signature(const DiscourseTree& tree) {
  std::string out;
  if (!tree.empty()) render(tree, tree.root_id(), true, out);
  return out;
}

std::vector<std::string> validate(const DiscourseTree& tree, size_t leaf_count) {
  std::vector<std::string> violations;
  if (tree.empty()) {
    violations.emplace_back("tree is empty");
    return violations;
  }
  if (leaf_count == 0) violations.emplace_back("expected leaf count must be at least 1");

  const auto leaves = tree.leaves();
  if (leaves.size() != leaf_count)
    violations.push_back("leaf count " + std::to_string(leaves.size()) + " != " +
                         std::to_string(leaf_count));

  size_t internal = 0;
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) continue;
    ++internal;
    const auto& l = tree.node(n.left);
    const auto& r = tree.node(n.right);
    if (l.span.last + 1 != r.span.first)
      violations.push_back("node spanning " + std::to_string(n.span.first) + ".." +
                           std::to_string(n.span.last) + " has non-adjacent children (" +
                           std::to_string(l.span.last) + " then " +
                           std::to_string(r.span.first) + ")");
  }
  if (leaf_count > 0 && internal != leaf_count - 1)
    violations.push_back("internal node count " + std::to_string(internal) + " != " +
                         std::to_string(leaf_count - 1));

  std::set<int32_t> seen;
  for (size_t i = 0; i < leaves.size(); ++i) {
    const int32_t leaf = leaves[i];
    if (leaf < 0 || static_cast<size_t>(leaf) >= leaf_count)
      violations.push_back("leaf index " + std::to_string(leaf) + " out of range");
    if (!seen.insert(leaf).second)
      violations.push_back("leaf index " + std::to_string(leaf) + " repeated");
    if (i > 0 && leaves[i - 1] + 1 != leaf)
      violations.push_back("leaves not contiguous: " + std::to_string(leaves[i - 1]) +
                           " followed by " + std::to_string(leaf));
  }
  if (!leaves.empty() && leaves.front() != 0)
    violations.push_back("first leaf is " + std::to_string(leaves.front()) + ", not 0");
  return violations;
}

}  // namespace macrodt
