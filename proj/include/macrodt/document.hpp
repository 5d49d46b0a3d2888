#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "macrodt/tree.hpp"

namespace macrodt {

enum class UnitKind { edu, sentence, paragraph };

const char* to_string(UnitKind kind);
std::optional<UnitKind> parse_unit_kind(std::string_view text);

struct Unit {
  std::string text;
  UnitKind kind = UnitKind::paragraph;
};

enum class Tier { gold, silver };

const char* to_string(Tier tier);
std::optional<Tier> parse_tier(std::string_view text);

/// A document as a flat sequence of units. Boundary b sits between unit b
/// and unit b+1, so an n-unit document has boundaries 0..n-2.
struct Document {
  std::string id;
  std::vector<Unit> units;
  std::vector<int32_t> topic_boundaries;  // sorted, unique
  std::vector<int32_t> paragraph_of;      // one id per unit, non-decreasing
  std::optional<DiscourseTree> gold_tree;
  std::optional<DiscourseTree> silver_tree;
  std::optional<Tier> tier;

  size_t size() const { return units.size(); }
  size_t boundary_count() const { return units.empty() ? 0 : units.size() - 1; }

  /// Number of distinct paragraphs (runs of equal paragraph ids).
  size_t paragraph_count() const;

  /// True when boundary b is one of topic_boundaries.
  bool is_topic_boundary(int32_t b) const;

  /// Maximal runs of units not separated by a topic boundary.
  std::vector<UnitSpan> topic_blocks() const;
};

/// Every invariant violation of `doc`; empty means
/// valid. Trees are checked for binary shape and leaf count.
std::vector<std::string> document_violations(const Document& doc);

/// Throws a data error naming the document when it is invalid.
void check_document(const Document& doc);

/// Builds a document of `n` placeholder units, one paragraph each.
Document synthetic_document(std::string id, size_t n, std::vector<int32_t> topic_boundaries = {});

}  // namespace macrodt
