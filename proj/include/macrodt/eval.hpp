#pragma once

#include <map>
#include <string>
#include <vector>

#include "macrodt/tree.hpp"

namespace macrodt {

struct SpanCount {
  size_t matched = 0;
  size_t total = 0;

  double accuracy() const { return total == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(total); }
  SpanCount& operator+=(const SpanCount& o) {
    matched += o.matched;
    total += o.total;
    return *this;
  }
  friend bool operator==(const SpanCount&, const SpanCount&) = default;
};

/// Internal-node spans of `pred` that also occur in `gold`, out of the
/// internal-node spans of `gold`. The root span counts unless
/// `include_root` is false.
SpanCount span_accuracy(const DiscourseTree& pred, const DiscourseTree& gold, bool include_root = true);

enum class LayerBucket { top2, middle, bottom2 };

const char* to_string(LayerBucket bucket);

/// Layer of an internal node: top2 when its depth is at most 1 (root depth
/// 0), else bottom2 when its height is at most 2 (leaf height 0), else
/// middle.
LayerBucket layer_bucket(const DiscourseTree& tree, DiscourseTree::NodeId node);

/// Distinct shapes per leaf count.
std::map<size_t, size_t> shape_distribution(const std::vector<DiscourseTree>& trees);

struct EvalConfig {
  bool include_root = true;
  /// Lower edges of the paragraph-count buckets; the last bucket is open.
  /// {2, 5, 8, 11} gives 2-4, 5-7, 8-10, >10.
  std::vector<size_t> length_edges = {2, 5, 8, 11};
};

struct EvalPair {
  std::string id;
  DiscourseTree pred;
  DiscourseTree gold;
  size_t paragraphs = 0;  // 0 means use the leaf count
};

struct EvalReport {
  SpanCount overall;
  size_t documents = 0;
  std::map<LayerBucket, SpanCount> by_layer;
  std::vector<std::pair<std::string, SpanCount>> by_length;  // in bucket order
  std::map<size_t, size_t> gold_shapes;
  std::map<size_t, size_t> pred_shapes;
  bool include_root = true;

  double span_accuracy() const { return overall.accuracy(); }
};

/// Bucket label for a paragraph count, e.g. "5-7" or ">10".
std::string length_bucket_label(const std::vector<size_t>& edges, size_t paragraphs);

/// Micro-averaged span accuracy (pooled counts) with per-layer, per-length
/// and shape breakdowns. A leaf-count mismatch aborts naming the document.
EvalReport corpus_eval(const std::vector<EvalPair>& pairs, const EvalConfig& config = {});

std::string report_json(const EvalReport& report);
std::string report_table(const EvalReport& report, bool by_layer = true, bool by_length = true);
std::string report_csv(const EvalReport& report);

}  // namespace macrodt
