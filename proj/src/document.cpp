#include "macrodt/document.hpp"

#include <algorithm>

#include "macrodt/error.hpp"

namespace macrodt {

const char* to_string(UnitKind kind) {
  switch (kind) {
    case UnitKind::edu: return "edu";
    case UnitKind::sentence: return "sentence";
    case UnitKind::paragraph: return "paragraph";
  }
  return "paragraph";
}

std::optional<UnitKind> parse_unit_kind(std::string_view text) {
  if (text == "edu") return UnitKind::edu;
  if (text == "sentence") return UnitKind::sentence;
  if (text == "paragraph") return UnitKind::paragraph;
  return std::nullopt;
}

const char* to_string(Tier tier) { return tier == Tier::gold ? "gold" : "silver"; }

std::optional<Tier> parse_tier(std::string_view text) {
  if (text == "gold") return Tier::gold;
  if (text == "silver") return Tier::silver;
  return std::nullopt;
}

size_t Document::paragraph_count() const {
  if (paragraph_of.empty()) return units.size();
  size_t runs = 1;
  for (size_t i = 1; i < paragraph_of.size(); ++i)
    if (paragraph_of[i] != paragraph_of[i - 1]) ++runs;
  return runs;
}

bool Document::is_topic_boundary(int32_t b) const {
  return std::binary_search(topic_boundaries.begin(), topic_boundaries.end(), b);
}

std::vector<UnitSpan> Document::topic_blocks() const {
  std::vector<UnitSpan> blocks;
  if (units.empty()) return blocks;
  int32_t start = 0;
  for (int32_t b : topic_boundaries) {
    blocks.push_back({start, b});
    start = b + 1;
  }
  blocks.push_back({start, static_cast<int32_t>(units.size()) - 1});
  return blocks;
}

std::vector<std::string> document_violations(const Document& doc) {
  std::vector<std::string> out;
  const auto n = static_cast<int64_t>(doc.units.size());
  if (doc.id.empty()) out.emplace_back("empty id");
  if (n == 0) out.emplace_back("no units");
  for (size_t i = 0; i < doc.topic_boundaries.size(); ++i) {
    const auto b = doc.topic_boundaries[i];
    if (b < 0 || b > n - 2)
      out.push_back("topic boundary " + std::to_string(b) + " outside [0, " + std::to_string(n - 2) + "]");
    if (i > 0 && doc.topic_boundaries[i - 1] >= b) out.emplace_back("topic boundaries not sorted and unique");
  }
  if (!doc.paragraph_of.empty()) {
    if (static_cast<int64_t>(doc.paragraph_of.size()) != n)
      out.push_back("paragraph_of has " + std::to_string(doc.paragraph_of.size()) + " entries for " +
                    std::to_string(n) + " units");
    for (size_t i = 1; i < doc.paragraph_of.size(); ++i)
      if (doc.paragraph_of[i] < doc.paragraph_of[i - 1]) {
        out.push_back("paragraph_of decreases at unit " + std::to_string(i));
        break;
      }
  }
  auto check_tree = [&](const std::optional<DiscourseTree>& tree, const char* name) {
    if (!tree || n == 0) return;
    for (auto& v : validate(*tree, static_cast<size_t>(n))) out.push_back(std::string(name) + ": " + v);
  };
  check_tree(doc.gold_tree, "gold_tree");
  check_tree(doc.silver_tree, "silver_tree");
  return out;
}

void check_document(const Document& doc) {
  auto problems = document_violations(doc);
  if (problems.empty()) return;
  std::string msg = "document '" + doc.id + "': " + problems.front();
  if (problems.size() > 1) msg += " (+" + std::to_string(problems.size() - 1) + " more)";
  fail(ErrorKind::data, msg);
}

Document synthetic_document(std::string id, size_t n, std::vector<int32_t> topic_boundaries) {
  Document doc;
  doc.id = std::move(id);
  doc.units.resize(n);
  doc.paragraph_of.resize(n);
  for (size_t i = 0; i < n; ++i) doc.paragraph_of[i] = static_cast<int32_t>(i);
  std::sort(topic_boundaries.begin(), topic_boundaries.end());
  topic_boundaries.erase(std::unique(topic_boundaries.begin(), topic_boundaries.end()), topic_boundaries.end());
  doc.topic_boundaries = std::move(topic_boundaries);
  return doc;
}

}  // namespace macrodt
