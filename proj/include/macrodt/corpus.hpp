#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "macrodt/builders.hpp"
#include "macrodt/document.hpp"
#include "macrodt/scorer.hpp"

namespace macrodt {

struct CorpusManifest {
  std::vector<Document> documents;
  std::optional<std::vector<int32_t>> folds;  // fold of documents[i]
  std::string provenance;

  size_t size() const { return documents.size(); }
};

/// Canonical single-line JSON for a document: id, units, paragraph_of,
/// topic_boundaries, then gold_tree, silver_tree and tier when present.
std::string document_to_json(const Document& doc);

/// Parses one JSONL record. Throws data errors; does not check invariants.
Document document_from_json(std::string_view line);

/// Reads a document JSONL file. Errors name the line number (parse errors)
/// or the document id (invariant violations); a missing file is a config
/// error.
CorpusManifest load_corpus(const std::string& path);
CorpusManifest parse_corpus(std::string_view text, const std::string& source = "<memory>");

std::string corpus_to_jsonl(const CorpusManifest& corpus);

/// Writes through a temporary file and renames on success.
void save_corpus(const CorpusManifest& corpus, const std::string& path);

/// Deterministic shuffle by `seed`, then round-robin into k folds, so fold
/// sizes differ by at most one.
CorpusManifest assign_folds(const CorpusManifest& corpus, int k, uint64_t seed);

/// For every fold f, scores the documents of fold f with scorer_factory(f)
/// (a model that never saw fold f) and attaches oracle-annotated silver
/// trees. Folds run on up to `jobs` threads; output order follows input.
CorpusManifest silver_gen(const CorpusManifest& corpus, const FoldScorerFactory& scorer_factory, int k,
                          int jobs = 1);

/// Collapses an EDU-level tree to paragraph leaves. Paragraph-aligned
/// brackets survive unchanged; where a paragraph straddles a bracket the
/// surviving pieces are rejoined left-branching.
DiscourseTree prune_to_macro(const DiscourseTree& tree, const std::vector<int32_t>& paragraph_of);

/// Paragraph-level document: one unit per paragraph (texts joined by a
/// space), topic boundaries that fall between paragraphs, pruned trees.
Document prune_document(const Document& doc);

struct Prediction {
  std::string id;
  DiscourseTree tree;
};

std::string predictions_to_jsonl(const std::vector<Prediction>& predictions);
std::vector<Prediction> load_predictions(const std::string& path);
void save_predictions(const std::vector<Prediction>& predictions, const std::string& path);

enum class Method { result_convert, oracle, shift_reduce, blink };

const char* to_string(Method m);

struct BuildOptions {
  Method method = Method::result_convert;
  BlinkMode mode = BlinkMode::bidirectional;
  double threshold = 0.5;
  int jobs = 1;
};

/// Runs one builder over every document. Shareable scorers are used by all
/// workers; others are built once per worker. Output is in input order.
std::vector<Prediction> build_corpus(const CorpusManifest& corpus, const ScorerFactory& scorer_factory,
                                     const BuildOptions& options);

/// Writes `content` to `path` via a sibling temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace macrodt
