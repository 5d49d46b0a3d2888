#include "macrodt/corpus.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "macrodt/error.hpp"

namespace macrodt {

using ojson = nlohmann::ordered_json;

const char* to_string(Method m) {
  switch (m) {
    case Method::result_convert: return "result-convert";
    case Method::oracle: return "oracle";
    case Method::shift_reduce: return "shift-reduce";
    case Method::blink: return "blink";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Serialization

std::string document_to_json(const Document& doc) {
  ojson j;
  j["id"] = doc.id;
  auto& units = j["units"] = ojson::array();
  for (const auto& u : doc.units) units.push_back(ojson{{"text", u.text}, {"kind", to_string(u.kind)}});
  j["paragraph_of"] = doc.paragraph_of;
  j["topic_boundaries"] = doc.topic_boundaries;
  if (doc.gold_tree) j["gold_tree"] = doc.gold_tree->to_string();
  if (doc.silver_tree) j["silver_tree"] = doc.silver_tree->to_string();
  if (doc.tier) j["tier"] = to_string(*doc.tier);
  try {
    return j.dump();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, "document '" + doc.id + "': " + e.what());
  }
}

namespace {

std::vector<int32_t> int_list(const ojson& j, const char* key) {
  std::vector<int32_t> out;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) fail(ErrorKind::data, std::string("'") + key + "' must be an array");
  for (const auto& v : *it) {
    if (!v.is_number_integer()) fail(ErrorKind::data, std::string("'") + key + "' must hold integers");
    out.push_back(v.get<int32_t>());
  }
  return out;
}

std::optional<DiscourseTree> tree_field(const ojson& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(ErrorKind::data, std::string("'") + key + "' must be a string");
  try {
    return DiscourseTree::parse(it->get<std::string>());
  } catch (const Error& e) {
    fail(ErrorKind::data, std::string(key) + ": " + e.what());
  }
}

}  // namespace

Document document_from_json(std::string_view line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::data, "record is not a JSON object");
  Document doc;
  if (!j.contains("id") || !j["id"].is_string()) fail(ErrorKind::data, "record needs a string 'id'");
  doc.id = j["id"].get<std::string>();
  if (!j.contains("units") || !j["units"].is_array()) fail(ErrorKind::data, "record needs a 'units' array");
  for (const auto& u : j["units"]) {
    Unit unit;
    if (u.is_string()) {
      unit.text = u.get<std::string>();
    } else if (u.is_object()) {
      if (u.contains("text")) {
        if (!u["text"].is_string()) fail(ErrorKind::data, "unit 'text' must be a string");
        unit.text = u["text"].get<std::string>();
      }
      if (u.contains("kind")) {
        auto kind = u["kind"].is_string() ? parse_unit_kind(u["kind"].get<std::string>()) : std::nullopt;
        if (!kind) fail(ErrorKind::data, "unit 'kind' must be edu, sentence or paragraph");
        unit.kind = *kind;
      }
    } else {
      fail(ErrorKind::data, "units must be objects");
    }
    doc.units.push_back(std::move(unit));
  }
  doc.paragraph_of = int_list(j, "paragraph_of");
  if (doc.paragraph_of.empty())
    for (size_t i = 0; i < doc.units.size(); ++i) doc.paragraph_of.push_back(static_cast<int32_t>(i));
  doc.topic_boundaries = int_list(j, "topic_boundaries");
  std::sort(doc.topic_boundaries.begin(), doc.topic_boundaries.end());
  doc.topic_boundaries.erase(std::unique(doc.topic_boundaries.begin(), doc.topic_boundaries.end()),
                             doc.topic_boundaries.end());
  doc.gold_tree = tree_field(j, "gold_tree");
  doc.silver_tree = tree_field(j, "silver_tree");
  if (j.contains("tier") && !j["tier"].is_null()) {
    auto tier = j["tier"].is_string() ? parse_tier(j["tier"].get<std::string>()) : std::nullopt;
    if (!tier) fail(ErrorKind::data, "'tier' must be gold or silver");
    doc.tier = tier;
  }
  return doc;
}

CorpusManifest parse_corpus(std::string_view text, const std::string& source) {
  CorpusManifest corpus;
  corpus.provenance = "source=" + source + "; boundary b lies between unit b and unit b+1";
  std::unordered_set<std::string> ids;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Document doc;
    try {
      doc = document_from_json(line);
    } catch (const Error& e) {
      fail(ErrorKind::data, source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      check_document(doc);
    } catch (const Error& e) {
      fail(ErrorKind::data, source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(doc.id).second)
      fail(ErrorKind::data, source + ":" + std::to_string(line_no) + ": duplicate document id '" + doc.id + "'");
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

namespace {
std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

CorpusManifest load_corpus(const std::string& path) { return parse_corpus(read_file(path), path); }

std::string corpus_to_jsonl(const CorpusManifest& corpus) {
  std::string out;
  for (const auto& d : corpus.documents) {
    out += document_to_json(d);
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      fail(ErrorKind::io, "failed writing '" + tmp + "'");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    fail(ErrorKind::io, "cannot rename output into '" + path + "'");
  }
}

void save_corpus(const CorpusManifest& corpus, const std::string& path) {
  write_file_atomic(path, corpus_to_jsonl(corpus));
}

// ---------------------------------------------------------------------------
// Folds

namespace {

// Unbiased draw from [0, bound) independent of the standard library's
// distribution implementation.
uint64_t draw_below(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % bound;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// Runs work(worker, index) for index in [0, count) on up to `jobs` threads.
// The failure with the smallest index is rethrown.
template <typename Setup, typename Work>
void parallel_for(size_t count, int jobs, Setup setup, Work work) {
  const size_t workers = std::max<size_t>(1, std::min<size_t>(count, static_cast<size_t>(std::max(1, jobs))));
  std::atomic<size_t> next{0};
  std::atomic<bool> stop{false};
  std::vector<std::exception_ptr> errors(count);

  auto run = [&]() {
    decltype(setup()) context{};
    bool ready = false;
    for (size_t i; !stop && (i = next++) < count;) {
      try {
        if (!ready) {
          context = setup();
          ready = true;
        }
        work(context, i);
      } catch (...) {
        errors[i] = std::current_exception();
        stop = true;
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> threads;
    for (size_t w = 0; w < workers; ++w) threads.emplace_back(run);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

[[noreturn]] void rethrow_for_document(const Error& e, const std::string& id) {
  throw Error(e.kind(), "document '" + id + "': " + e.what());
}

}  // namespace

CorpusManifest assign_folds(const CorpusManifest& corpus, int k, uint64_t seed) {
  if (k < 2) fail(ErrorKind::config, "fold count must be at least 2");
  if (corpus.size() < static_cast<size_t>(k))
    fail(ErrorKind::config, "cannot split " + std::to_string(corpus.size()) + " documents into " +
                                std::to_string(k) + " folds");
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[draw_below(rng, i)]);

  CorpusManifest out = corpus;
  std::vector<int32_t> folds(corpus.size());
  for (size_t pos = 0; pos < order.size(); ++pos) folds[order[pos]] = static_cast<int32_t>(pos % static_cast<size_t>(k));
  out.folds = std::move(folds);
  return out;
}

CorpusManifest silver_gen(const CorpusManifest& corpus, const FoldScorerFactory& scorer_factory, int k,
                          int jobs) {
  if (!corpus.folds) fail(ErrorKind::config, "silver_gen needs fold assignments");
  const auto& folds = *corpus.folds;
  if (folds.size() != corpus.size()) fail(ErrorKind::config, "fold map does not cover every document");
  for (auto f : folds)
    if (f < 0 || f >= k) fail(ErrorKind::config, "fold index " + std::to_string(f) + " outside [0, k)");

  CorpusManifest out = corpus;
  parallel_for(
      static_cast<size_t>(k), jobs, [] { return 0; },
      [&](int, size_t fold_index) {
        const int fold = static_cast<int>(fold_index);
        std::unique_ptr<Scorer> scorer;
        try {
          scorer = scorer_factory(fold);
        } catch (const Error& e) {
          throw Error(e.kind(), "fold " + std::to_string(fold) + ": " + e.what());
        } catch (const std::exception& e) {
          fail(ErrorKind::scorer, "fold " + std::to_string(fold) + ": " + e.what());
        }
        if (!scorer) fail(ErrorKind::scorer, "fold " + std::to_string(fold) + ": no scorer");
        for (size_t i = 0; i < out.size(); ++i) {
          if (folds[i] != fold) continue;
          auto& doc = out.documents[i];
          try {
            doc.silver_tree = oracle_annotate(doc, *scorer);
          } catch (const Error& e) {
            throw Error(e.kind(), "fold " + std::to_string(fold) + ", document '" + doc.id + "': " + e.what());
          }
          doc.tier = Tier::silver;
        }
      });
  return out;
}

// ---------------------------------------------------------------------------
// Pruning

namespace {

struct ParagraphRuns {
  std::vector<int32_t> paragraph_of_unit;  // dense paragraph index per unit
  std::vector<UnitSpan> units_of;          // unit span per paragraph
};

ParagraphRuns paragraph_runs(const std::vector<int32_t>& paragraph_of) {
  ParagraphRuns runs;
  std::unordered_set<int32_t> closed;
  for (size_t i = 0; i < paragraph_of.size(); ++i) {
    const auto unit = static_cast<int32_t>(i);
    if (i == 0 || paragraph_of[i] != paragraph_of[i - 1]) {
      if (i > 0) closed.insert(paragraph_of[i - 1]);
      if (closed.count(paragraph_of[i]))
        fail(ErrorKind::structural, "paragraph " + std::to_string(paragraph_of[i]) + " is not contiguous");
      runs.units_of.push_back({unit, unit});
    } else {
      runs.units_of.back().last = unit;
    }
    runs.paragraph_of_unit.push_back(static_cast<int32_t>(runs.units_of.size()) - 1);
  }
  return runs;
}

}  // namespace

DiscourseTree prune_to_macro(const DiscourseTree& tree, const std::vector<int32_t>& paragraph_of) {
  const auto problems = validate(tree, paragraph_of.size());
  if (!problems.empty()) fail(ErrorKind::structural, "prune_to_macro: " + problems.front());
  const auto runs = paragraph_runs(paragraph_of);
  const auto paragraphs = static_cast<int32_t>(runs.units_of.size());

  // Paragraph-aligned multi-paragraph spans of the original tree, keyed by
  // first paragraph. They nest, so each start maps to a chain of ends.
  std::map<int32_t, std::vector<int32_t>> aligned;
  for (const auto& span : tree.internal_spans()) {
    const auto pf = runs.paragraph_of_unit[static_cast<size_t>(span.first)];
    const auto pl = runs.paragraph_of_unit[static_cast<size_t>(span.last)];
    if (pf == pl) continue;
    if (runs.units_of[static_cast<size_t>(pf)].first != span.first ||
        runs.units_of[static_cast<size_t>(pl)].last != span.last)
      continue;
    aligned[pf].push_back(pl);
  }

  TreeBuilder builder(static_cast<size_t>(paragraphs));
  // Builds paragraph span [a, b]: maximal aligned sub-spans and uncovered
  // paragraphs become children, joined left-branching.
  auto build = [&](auto&& self, int32_t a, int32_t b) -> TreeBuilder::NodeId {
    if (a == b) return builder.add_leaf(a);
    std::vector<TreeBuilder::NodeId> parts;
    for (int32_t p = a; p <= b;) {
      int32_t end = p;
      if (auto it = aligned.find(p); it != aligned.end())
        for (auto e : it->second)
          if (e <= b && !(p == a && e == b) && e > end) end = e;
      parts.push_back(self(self, p, end));
      p = end + 1;
    }
    auto acc = parts.front();
    for (size_t i = 1; i < parts.size(); ++i) acc = builder.add_internal(acc, parts[i]);
    return acc;
  };
  return std::move(builder).finish(build(build, 0, paragraphs - 1));
}

Document prune_document(const Document& doc) {
  check_document(doc);
  const auto runs = paragraph_runs(doc.paragraph_of);
  Document out;
  out.id = doc.id;
  for (size_t p = 0; p < runs.units_of.size(); ++p) {
    Unit unit;
    unit.kind = UnitKind::paragraph;
    for (auto u = runs.units_of[p].first; u <= runs.units_of[p].last; ++u) {
      const auto& text = doc.units[static_cast<size_t>(u)].text;
      if (!unit.text.empty() && !text.empty()) unit.text += ' ';
      unit.text += text;
    }
    out.units.push_back(std::move(unit));
    out.paragraph_of.push_back(static_cast<int32_t>(p));
  }
  for (auto b : doc.topic_boundaries) {
    const auto p = runs.paragraph_of_unit[static_cast<size_t>(b)];
    if (runs.units_of[static_cast<size_t>(p)].last == b) out.topic_boundaries.push_back(p);
  }
  if (doc.gold_tree) out.gold_tree = prune_to_macro(*doc.gold_tree, doc.paragraph_of);
  if (doc.silver_tree) out.silver_tree = prune_to_macro(*doc.silver_tree, doc.paragraph_of);
  out.tier = doc.tier;
  return out;
}

// ---------------------------------------------------------------------------
// Predictions and corpus builds

std::string predictions_to_jsonl(const std::vector<Prediction>& predictions) {
  std::string out;
  for (const auto& p : predictions) {
    ojson j;
    j["id"] = p.id;
    j["pred_tree"] = p.tree.to_string();
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Prediction> load_predictions(const std::string& path) {
  const auto text = read_file(path);
  std::vector<Prediction> out;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path + ":" + std::to_string(line_no) + ": ";
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::data, where + "invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("pred_tree") ||
        !j["pred_tree"].is_string())
      fail(ErrorKind::data, where + "record needs string fields 'id' and 'pred_tree'");
    Prediction p;
    p.id = j["id"].get<std::string>();
    try {
      p.tree = DiscourseTree::parse(j["pred_tree"].get<std::string>());
    } catch (const Error& e) {
      fail(ErrorKind::data, where + e.what());
    }
    if (auto problems = validate(p.tree, p.tree.leaf_count()); !problems.empty())
      fail(ErrorKind::data, where + "document '" + p.id + "': " + problems.front());
    out.push_back(std::move(p));
  }
  return out;
}

void save_predictions(const std::vector<Prediction>& predictions, const std::string& path) {
  write_file_atomic(path, predictions_to_jsonl(predictions));
}

std::vector<Prediction> build_corpus(const CorpusManifest& corpus, const ScorerFactory& scorer_factory,
                                     const BuildOptions& options) {
  if (options.method == Method::shift_reduce && !(options.threshold >= 0.0 && options.threshold <= 1.0))
    fail(ErrorKind::config, "threshold must lie in [0,1]");
  std::vector<Prediction> out(corpus.size());
  parallel_for(
      corpus.size(), options.jobs, [&] { return std::shared_ptr<Scorer>(scorer_factory()); },
      [&](std::shared_ptr<Scorer>& scorer, size_t i) {
        const auto& doc = corpus.documents[i];
        out[i].id = doc.id;
        try {
          switch (options.method) {
            case Method::result_convert: out[i].tree = result_convert(doc, *scorer); break;
            case Method::oracle: out[i].tree = oracle_annotate(doc, *scorer); break;
            case Method::shift_reduce: out[i].tree = shift_reduce(doc, *scorer, options.threshold).tree; break;
            case Method::blink: out[i].tree = blink_decode(doc, *scorer, options.mode).tree; break;
          }
        } catch (const Error& e) {
          rethrow_for_document(e, doc.id);
        }
      });
  return out;
}

}  // namespace macrodt
