#include "macrodt/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "macrodt/error.hpp"

namespace macrodt {

const char* to_string(LayerBucket bucket) {
  switch (bucket) {
    case LayerBucket::top2: return "top2";
    case LayerBucket::middle: return "middle";
    case LayerBucket::bottom2: return "bottom2";
  }
  return "?";
}

namespace {

std::set<UnitSpan> span_set(const DiscourseTree& tree, bool include_root) {
  std::set<UnitSpan> spans;
  for (const auto& s : tree.internal_spans()) spans.insert(s);
  if (!include_root && !tree.empty()) spans.erase(tree.root().span);
  return spans;
}

// Depth of every node, indexed like tree.nodes().
std::vector<int32_t> depths(const DiscourseTree& tree) {
  std::vector<int32_t> depth(tree.nodes().size(), 0);
  for (auto id = tree.root_id(); id >= 0; --id) {  // parents follow children in post-order
    const auto& n = tree.node(id);
    if (n.is_leaf()) continue;
    depth[static_cast<size_t>(n.left)] = depth[static_cast<size_t>(id)] + 1;
    depth[static_cast<size_t>(n.right)] = depth[static_cast<size_t>(id)] + 1;
  }
  return depth;
}

std::vector<int32_t> heights(const DiscourseTree& tree) {
  std::vector<int32_t> height(tree.nodes().size(), 0);
  for (size_t id = 0; id < tree.nodes().size(); ++id) {
    const auto& n = tree.nodes()[id];
    if (n.is_leaf()) continue;
    height[id] = 1 + std::max(height[static_cast<size_t>(n.left)], height[static_cast<size_t>(n.right)]);
  }
  return height;
}

LayerBucket bucket_for(int32_t depth, int32_t height) {
  if (depth <= 1) return LayerBucket::top2;
  if (height <= 2) return LayerBucket::bottom2;
  return LayerBucket::middle;
}

}  // namespace

SpanCount span_accuracy(const DiscourseTree& pred, const DiscourseTree& gold, bool include_root) {
  if (pred.leaf_count() != gold.leaf_count())
    fail(ErrorKind::data, "span_accuracy: predicted tree has " + std::to_string(pred.leaf_count()) +
                              " leaves, gold has " + std::to_string(gold.leaf_count()));
  const auto p = span_set(pred, include_root);
  const auto g = span_set(gold, include_root);
  SpanCount c;
  c.total = g.size();
  for (const auto& s : g) c.matched += p.count(s);
  return c;
}

LayerBucket layer_bucket(const DiscourseTree& tree, DiscourseTree::NodeId node) {
  if (tree.node(node).is_leaf()) fail(ErrorKind::structural, "layer_bucket: node is a leaf");
  return bucket_for(depths(tree)[static_cast<size_t>(node)], heights(tree)[static_cast<size_t>(node)]);
}

std::map<size_t, size_t> shape_distribution(const std::vector<DiscourseTree>& trees) {
  std::map<size_t, std::set<std::string>> shapes;
  for (const auto& t : trees)
    if (!t.empty()) shapes[t.leaf_count()].insert(shape_signature(t));
  std::map<size_t, size_t> out;
  for (const auto& [n, s] : shapes) out[n] = s.size();
  return out;
}

std::string length_bucket_label(const std::vector<size_t>& edges, size_t paragraphs) {
  if (edges.empty()) return "all";
  if (paragraphs < edges.front()) return "<" + std::to_string(edges.front());
  for (size_t i = 0; i + 1 < edges.size(); ++i)
    if (paragraphs < edges[i + 1]) return std::to_string(edges[i]) + "-" + std::to_string(edges[i + 1] - 1);
  return ">" + std::to_string(edges.back() - 1);
}

EvalReport corpus_eval(const std::vector<EvalPair>& pairs, const EvalConfig& config) {
  if (pairs.empty()) fail(ErrorKind::data, "corpus_eval: no documents to evaluate");
  if (!std::is_sorted(config.length_edges.begin(), config.length_edges.end()) ||
      std::adjacent_find(config.length_edges.begin(), config.length_edges.end()) != config.length_edges.end())
    fail(ErrorKind::config, "length bucket edges must be strictly increasing");

  EvalReport report;
  report.include_root = config.include_root;
  for (auto b : {LayerBucket::top2, LayerBucket::middle, LayerBucket::bottom2}) report.by_layer[b] = {};

  // Fixed bucket order: underflow first, then each edge.
  std::vector<std::string> labels;
  if (!config.length_edges.empty() && config.length_edges.front() > 0)
    labels.push_back(length_bucket_label(config.length_edges, 0));
  for (auto e : config.length_edges) labels.push_back(length_bucket_label(config.length_edges, e));
  if (config.length_edges.empty()) labels.emplace_back("all");
  std::map<std::string, SpanCount> length_counts;
  std::set<std::string> used;

  std::vector<DiscourseTree> golds, preds;
  for (const auto& pair : pairs) {
    SpanCount doc;
    try {
      doc = span_accuracy(pair.pred, pair.gold, config.include_root);
    } catch (const Error& e) {
      fail(ErrorKind::data, "document '" + pair.id + "': " + e.what());
    }
    report.overall += doc;
    ++report.documents;

    const auto pred_spans = span_set(pair.pred, config.include_root);
    const auto d = depths(pair.gold);
    const auto h = heights(pair.gold);
    for (size_t id = 0; id < pair.gold.nodes().size(); ++id) {
      const auto& node = pair.gold.nodes()[id];
      if (node.is_leaf()) continue;
      if (!config.include_root && static_cast<DiscourseTree::NodeId>(id) == pair.gold.root_id()) continue;
      auto& bucket = report.by_layer[bucket_for(d[id], h[id])];
      ++bucket.total;
      bucket.matched += pred_spans.count(node.span);
    }

    const size_t paragraphs = pair.paragraphs ? pair.paragraphs : pair.gold.leaf_count();
    const auto label = length_bucket_label(config.length_edges, paragraphs);
    length_counts[label] += doc;
    used.insert(label);
    golds.push_back(pair.gold);
    preds.push_back(pair.pred);
  }

  for (const auto& label : labels) {
    if (label.front() == '<' && !used.count(label)) continue;  // show underflow only when populated
    report.by_length.emplace_back(label, length_counts[label]);
  }
  report.gold_shapes = shape_distribution(golds);
  report.pred_shapes = shape_distribution(preds);
  return report;
}

namespace {

std::string fixed4(const SpanCount& c) {
  if (c.total == 0) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", c.accuracy());
  return buf;
}

nlohmann::ordered_json count_json(const SpanCount& c) {
  nlohmann::ordered_json j = {{"matched", c.matched}, {"total", c.total}};
  j["accuracy"] = c.total ? nlohmann::ordered_json(c.accuracy()) : nlohmann::ordered_json(nullptr);
  return j;
}

nlohmann::ordered_json shapes_json(const std::map<size_t, size_t>& shapes) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [n, c] : shapes) out[std::to_string(n)] = c;
  return out;
}

}  // namespace

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["span_accuracy"] = report.span_accuracy();
  j["matched"] = report.overall.matched;
  j["total"] = report.overall.total;
  j["documents"] = report.documents;
  j["include_root"] = report.include_root;
  j["layer_definition"] = "top2: depth<=1 (root depth 0); bottom2: height<=2 (leaf height 0); middle: rest";
  auto& layers = j["by_layer"] = nlohmann::ordered_json::object();
  for (const auto& [b, c] : report.by_layer) layers[to_string(b)] = count_json(c);
  auto& lengths = j["by_length"] = nlohmann::ordered_json::object();
  for (const auto& [label, c] : report.by_length) lengths[label] = count_json(c);
  j["shape_counts"] = {{"gold", shapes_json(report.gold_shapes)}, {"pred", shapes_json(report.pred_shapes)}};
  return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report, bool by_layer, bool by_length) {
  std::ostringstream os;
  char line[128];
  auto row = [&](const std::string& name, const SpanCount& c) {
    std::snprintf(line, sizeof line, "%-10s %8zu %8zu %9s\n", name.c_str(), c.matched, c.total,
                  fixed4(c).c_str());
    os << line;
  };
  os << "# span accuracy, micro-averaged over " << report.documents << " document(s), root "
     << (report.include_root ? "included" : "excluded") << "\n";
  std::snprintf(line, sizeof line, "%-10s %8s %8s %9s\n", "bucket", "matched", "total", "accuracy");
  os << line;
  row("overall", report.overall);
  if (by_layer) {
    os << "# by layer (top2: depth<=1, bottom2: height<=2, middle: rest)\n";
    for (const auto& [b, c] : report.by_layer) row(to_string(b), c);
  }
  if (by_length) {
    os << "# by paragraph count\n";
    for (const auto& [label, c] : report.by_length) row(label, c);
  }
  return os.str();
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "series,bucket,matched,total,accuracy\n";
  auto row = [&](const char* series, const std::string& bucket, const SpanCount& c) {
    os << series << ',' << bucket << ',' << c.matched << ',' << c.total << ',' << fixed4(c) << '\n';
  };
  row("overall", "all", report.overall);
  for (const auto& [b, c] : report.by_layer) row("layer", to_string(b), c);
  for (const auto& [label, c] : report.by_length) row("length", label, c);
  return os.str();
}

}  // namespace macrodt
