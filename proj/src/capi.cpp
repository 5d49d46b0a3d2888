#include "macrodt/macrodt.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "macrodt/builders.hpp"
#include "macrodt/corpus.hpp"
#include "macrodt/error.hpp"
#include "macrodt/eval.hpp"
#include "macrodt/ranking.hpp"
#include "macrodt/scorers.hpp"

struct mdt_tree {
  macrodt::DiscourseTree tree;
};

struct mdt_corpus {
  macrodt::CorpusManifest corpus;
};

struct mdt_scorer {
  std::unique_ptr<macrodt::Scorer> scorer;
};

struct mdt_predictions {
  std::vector<macrodt::Prediction> items;
};

struct mdt_report {
  macrodt::EvalReport report;
};

namespace {

using namespace macrodt;

thread_local std::string last_error;

mdt_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::structural: return MDT_ERR_STRUCTURAL;
    case ErrorKind::capability: return MDT_ERR_CAPABILITY;
    case ErrorKind::config: return MDT_ERR_CONFIG;
    case ErrorKind::data: return MDT_ERR_DATA;
    case ErrorKind::scorer: return MDT_ERR_SCORER;
    case ErrorKind::io: return MDT_ERR_IO;
  }
  return MDT_ERR_INTERNAL;
}

mdt_status set_error(mdt_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename Fn>
mdt_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return MDT_OK;
  } catch (const Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(MDT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(MDT_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(MDT_ERR_INTERNAL, "unknown exception");
  }
}

#define MDT_REQUIRE(cond, what) \
  if (!(cond)) return set_error(MDT_ERR_ARGUMENT, what)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

Method method_of(mdt_method m) {
  switch (m) {
    case MDT_METHOD_RESULT_CONVERT: return Method::result_convert;
    case MDT_METHOD_ORACLE: return Method::oracle;
    case MDT_METHOD_SHIFT_REDUCE: return Method::shift_reduce;
    case MDT_METHOD_BLINK: return Method::blink;
  }
  fail(ErrorKind::config, "unknown build method");
}

BlinkMode mode_of(mdt_blink_mode m) {
  switch (m) {
    case MDT_BLINK_BI: return BlinkMode::bidirectional;
    case MDT_BLINK_DOWN: return BlinkMode::down_only;
    case MDT_BLINK_UP: return BlinkMode::up_only;
  }
  fail(ErrorKind::config, "unknown blink mode");
}

BuildOptions build_options_of(const mdt_build_options* options) {
  mdt_build_options defaults;
  mdt_build_options_init(&defaults);
  const auto& o = options ? *options : defaults;
  BuildOptions out;
  out.method = method_of(o.method);
  out.mode = mode_of(o.mode);
  out.threshold = o.threshold;
  out.jobs = o.jobs;
  return out;
}

const std::optional<DiscourseTree>& tree_of(const Document& doc, std::string_view field) {
  if (field == "gold_tree") return doc.gold_tree;
  if (field == "silver_tree") return doc.silver_tree;
  fail(ErrorKind::config, "gold field must be gold_tree or silver_tree");
}

}  // namespace

extern "C" {

const char* mdt_version(void) { return "1.0.0"; }

const char* mdt_last_error(void) { return last_error.c_str(); }

const char* mdt_status_name(mdt_status status) {
  switch (status) {
    case MDT_OK: return "ok";
    case MDT_ERR_ARGUMENT: return "argument error";
    case MDT_ERR_CONFIG: return "config error";
    case MDT_ERR_DATA: return "data error";
    case MDT_ERR_SCORER: return "scorer error";
    case MDT_ERR_CAPABILITY: return "capability error";
    case MDT_ERR_STRUCTURAL: return "structural error";
    case MDT_ERR_IO: return "io error";
    case MDT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void mdt_string_free(char* s) { std::free(s); }

// Trees

mdt_status mdt_tree_parse(const char* text, mdt_tree** out) {
  MDT_REQUIRE(text && out, "mdt_tree_parse: null argument");
  return guarded([&] { *out = new mdt_tree{DiscourseTree::parse(text)}; });
}

mdt_status mdt_tree_from_ranks(size_t leaf_count, const int64_t* ranks, size_t rank_count, mdt_direction direction,
                               mdt_tree** out) {
  MDT_REQUIRE(out && (ranks || rank_count == 0), "mdt_tree_from_ranks: null argument");
  return guarded([&] {
    BoundaryRanking ranking(std::vector<int64_t>(ranks, ranks + rank_count));
    const auto dir = direction == MDT_BOTTOM_UP ? Direction::bottom_up : Direction::top_down;
    *out = new mdt_tree{tree_from_ranks(leaf_count, ranking, dir)};
  });
}

void mdt_tree_free(mdt_tree* tree) { delete tree; }

size_t mdt_tree_leaf_count(const mdt_tree* tree) { return tree ? tree->tree.leaf_count() : 0; }

int mdt_tree_equal(const mdt_tree* a, const mdt_tree* b) { return a && b && a->tree == b->tree ? 1 : 0; }

mdt_status mdt_tree_text(const mdt_tree* tree, char** out) {
  MDT_REQUIRE(tree && out, "mdt_tree_text: null argument");
  return guarded([&] { *out = dup_string(tree->tree.to_string()); });
}

mdt_status mdt_tree_shape(const mdt_tree* tree, char** out) {
  MDT_REQUIRE(tree && out, "mdt_tree_shape: null argument");
  return guarded([&] { *out = dup_string(shape_signature(tree->tree)); });
}

mdt_status mdt_tree_ranks(const mdt_tree* tree, int64_t* ranks, size_t cap) {
  MDT_REQUIRE(tree, "mdt_tree_ranks: null tree");
  return guarded([&] {
    const auto ranking = ranks_from_tree(tree->tree);
    if (cap < ranking.size()) fail(ErrorKind::config, "mdt_tree_ranks: buffer too small");
    std::copy(ranking.ranks().begin(), ranking.ranks().end(), ranks);
  });
}

mdt_status mdt_tree_validate(const mdt_tree* tree, size_t leaf_count, size_t* violation_count, char** report) {
  MDT_REQUIRE(tree, "mdt_tree_validate: null tree");
  return guarded([&] {
    const auto problems = validate(tree->tree, leaf_count);
    if (violation_count) *violation_count = problems.size();
    if (report) {
      std::string joined;
      for (const auto& p : problems) joined += p + "\n";
      *report = dup_string(joined);
    }
  });
}

mdt_status mdt_span_accuracy(const mdt_tree* pred, const mdt_tree* gold, int include_root, size_t* matched,
                             size_t* total) {
  MDT_REQUIRE(pred && gold, "mdt_span_accuracy: null tree");
  return guarded([&] {
    const auto c = span_accuracy(pred->tree, gold->tree, include_root != 0);
    if (matched) *matched = c.matched;
    if (total) *total = c.total;
  });
}

// Corpora

mdt_status mdt_corpus_load(const char* path, mdt_corpus** out) {
  MDT_REQUIRE(path && out, "mdt_corpus_load: null argument");
  return guarded([&] { *out = new mdt_corpus{load_corpus(path)}; });
}

mdt_status mdt_corpus_parse(const char* jsonl, mdt_corpus** out) {
  MDT_REQUIRE(jsonl && out, "mdt_corpus_parse: null argument");
  return guarded([&] { *out = new mdt_corpus{parse_corpus(jsonl)}; });
}

void mdt_corpus_free(mdt_corpus* corpus) { delete corpus; }

size_t mdt_corpus_size(const mdt_corpus* corpus) { return corpus ? corpus->corpus.size() : 0; }

const char* mdt_corpus_document_id(const mdt_corpus* corpus, size_t index) {
  if (!corpus || index >= corpus->corpus.size()) return nullptr;
  return corpus->corpus.documents[index].id.c_str();
}

mdt_status mdt_corpus_save(const mdt_corpus* corpus, const char* path) {
  MDT_REQUIRE(corpus && path, "mdt_corpus_save: null argument");
  return guarded([&] { save_corpus(corpus->corpus, path); });
}

mdt_status mdt_corpus_jsonl(const mdt_corpus* corpus, char** out) {
  MDT_REQUIRE(corpus && out, "mdt_corpus_jsonl: null argument");
  return guarded([&] { *out = dup_string(corpus_to_jsonl(corpus->corpus)); });
}

mdt_status mdt_corpus_assign_folds(mdt_corpus* corpus, int k, uint64_t seed) {
  MDT_REQUIRE(corpus, "mdt_corpus_assign_folds: null corpus");
  return guarded([&] { corpus->corpus = assign_folds(corpus->corpus, k, seed); });
}

int mdt_corpus_fold(const mdt_corpus* corpus, size_t index) {
  if (!corpus || !corpus->corpus.folds || index >= corpus->corpus.size()) return -1;
  return (*corpus->corpus.folds)[index];
}

mdt_status mdt_corpus_prune(const mdt_corpus* corpus, mdt_corpus** out) {
  MDT_REQUIRE(corpus && out, "mdt_corpus_prune: null argument");
  return guarded([&] {
    auto result = std::make_unique<mdt_corpus>();
    result->corpus.provenance = corpus->corpus.provenance + "; pruned to paragraphs";
    for (const auto& doc : corpus->corpus.documents) {
      try {
        result->corpus.documents.push_back(prune_document(doc));
      } catch (const Error& e) {
        throw Error(e.kind() == ErrorKind::structural ? ErrorKind::data : e.kind(),
                    "document '" + doc.id + "': " + e.what());
      }
    }
    *out = result.release();
  });
}

mdt_status mdt_corpus_verify_oracle(const mdt_corpus* corpus, size_t* violations, char** report) {
  MDT_REQUIRE(corpus, "mdt_corpus_verify_oracle: null corpus");
  return guarded([&] {
    size_t count = 0;
    std::string text;
    for (const auto& doc : corpus->corpus.documents) {
      if (!doc.silver_tree) {
        ++count;
        text += doc.id + ": no silver tree\n";
        continue;
      }
      for (const auto& v : oracle_violations(doc, *doc.silver_tree)) {
        ++count;
        text += doc.id + ": " + v + "\n";
      }
    }
    if (violations) *violations = count;
    if (report) *report = dup_string(text);
  });
}

// Scorers

mdt_status mdt_scorer_open(const char* spec, mdt_scorer** out) {
  MDT_REQUIRE(spec && out, "mdt_scorer_open: null argument");
  return guarded([&] { *out = new mdt_scorer{make_scorer(spec)}; });
}

void mdt_scorer_free(mdt_scorer* scorer) { delete scorer; }

unsigned mdt_scorer_capabilities(const mdt_scorer* scorer) {
  return scorer ? scorer->scorer->capabilities().bits() : 0u;
}

mdt_status mdt_scorer_seg_prob(mdt_scorer* scorer, const mdt_corpus* corpus, size_t index, double* out,
                               size_t cap) {
  MDT_REQUIRE(scorer && corpus, "mdt_scorer_seg_prob: null argument");
  MDT_REQUIRE(index < corpus->corpus.size(), "mdt_scorer_seg_prob: document index out of range");
  return guarded([&] {
    const auto scores = scorer->scorer->seg_scores(corpus->corpus.documents[index]);
    if (cap < scores.size() || (!out && scores.size() > 0))
      fail(ErrorKind::config, "mdt_scorer_seg_prob: buffer too small");
    std::copy(scores.seg_prob.begin(), scores.seg_prob.end(), out);
  });
}

// Builders

void mdt_build_options_init(mdt_build_options* options) {
  if (!options) return;
  options->method = MDT_METHOD_RESULT_CONVERT;
  options->mode = MDT_BLINK_BI;
  options->threshold = 0.5;
  options->jobs = 1;
}

mdt_status mdt_build(const mdt_corpus* corpus, const char* scorer_spec, const mdt_build_options* options,
                     mdt_predictions** out) {
  MDT_REQUIRE(corpus && scorer_spec && out, "mdt_build: null argument");
  return guarded([&] {
    const auto opts = build_options_of(options);
    auto factory = scorer_factory(scorer_spec);
    *out = new mdt_predictions{build_corpus(corpus->corpus, factory, opts)};
  });
}

mdt_status mdt_build_tree(mdt_scorer* scorer, const mdt_corpus* corpus, size_t index,
                          const mdt_build_options* options, mdt_tree** out) {
  MDT_REQUIRE(scorer && corpus && out, "mdt_build_tree: null argument");
  MDT_REQUIRE(index < corpus->corpus.size(), "mdt_build_tree: document index out of range");
  return guarded([&] {
    const auto opts = build_options_of(options);
    const auto& doc = corpus->corpus.documents[index];
    auto& s = *scorer->scorer;
    DiscourseTree tree;
    switch (opts.method) {
      case Method::result_convert: tree = result_convert(doc, s); break;
      case Method::oracle: tree = oracle_annotate(doc, s); break;
      case Method::shift_reduce: tree = shift_reduce(doc, s, opts.threshold).tree; break;
      case Method::blink: tree = blink_decode(doc, s, opts.mode).tree; break;
    }
    *out = new mdt_tree{std::move(tree)};
  });
}

void mdt_predictions_free(mdt_predictions* predictions) { delete predictions; }

size_t mdt_predictions_size(const mdt_predictions* predictions) {
  return predictions ? predictions->items.size() : 0;
}

mdt_status mdt_predictions_tree_text(const mdt_predictions* predictions, size_t index, char** out) {
  MDT_REQUIRE(predictions && out, "mdt_predictions_tree_text: null argument");
  MDT_REQUIRE(index < predictions->items.size(), "mdt_predictions_tree_text: index out of range");
  return guarded([&] { *out = dup_string(predictions->items[index].tree.to_string()); });
}

mdt_status mdt_predictions_save(const mdt_predictions* predictions, const char* path) {
  MDT_REQUIRE(predictions && path, "mdt_predictions_save: null argument");
  return guarded([&] { save_predictions(predictions->items, path); });
}

void mdt_oracle_options_init(mdt_oracle_options* options) {
  if (!options) return;
  options->folds = 0;
  options->seed = 13;
  options->jobs = 1;
}

mdt_status mdt_oracle_annotate(const mdt_corpus* corpus, const char* scorer_spec, const mdt_oracle_options* options,
                               mdt_corpus** out) {
  MDT_REQUIRE(corpus && scorer_spec && out, "mdt_oracle_annotate: null argument");
  return guarded([&] {
    mdt_oracle_options o;
    mdt_oracle_options_init(&o);
    if (options) o = *options;
    if (o.folds < 0 || o.folds == 1) fail(ErrorKind::config, "folds must be 0 or at least 2");

    CorpusManifest result;
    if (o.folds == 0) {
      std::vector<int32_t> single(corpus->corpus.size(), 0);
      CorpusManifest one = corpus->corpus;
      one.folds = std::move(single);
      auto factory = scorer_factory(scorer_spec);
      result = silver_gen(one, [&](int) { return factory(); }, 1, 1);
      result.folds.reset();
    } else {
      auto folded = assign_folds(corpus->corpus, o.folds, o.seed);
      result = silver_gen(folded, fold_scorer_factory(scorer_spec), o.folds, o.jobs);
    }
    *out = new mdt_corpus{std::move(result)};
  });
}

// Evaluation

void mdt_eval_options_init(mdt_eval_options* options) {
  if (!options) return;
  options->include_root = 1;
  options->length_edges = nullptr;
  options->length_edge_count = 0;
  options->gold_field = nullptr;
}

mdt_status mdt_evaluate_files(const char* predictions_path, const char* gold_path, const mdt_eval_options* options,
                              mdt_report** out) {
  MDT_REQUIRE(predictions_path && gold_path && out, "mdt_evaluate_files: null argument");
  return guarded([&] {
    mdt_eval_options o;
    mdt_eval_options_init(&o);
    if (options) o = *options;
    EvalConfig config;
    config.include_root = o.include_root != 0;
    if (o.length_edges) config.length_edges.assign(o.length_edges, o.length_edges + o.length_edge_count);
    const std::string field = o.gold_field ? o.gold_field : "gold_tree";

    const auto predictions = load_predictions(predictions_path);
    const auto gold = load_corpus(gold_path);
    std::unordered_map<std::string, const Prediction*> by_id;
    for (const auto& p : predictions)
      if (!by_id.emplace(p.id, &p).second)
        fail(ErrorKind::data, std::string(predictions_path) + ": duplicate prediction for '" + p.id + "'");

    std::vector<EvalPair> pairs;
    for (const auto& doc : gold.documents) {
      const auto& tree = tree_of(doc, field);
      if (!tree) fail(ErrorKind::data, "document '" + doc.id + "' has no " + field);
      auto it = by_id.find(doc.id);
      if (it == by_id.end()) fail(ErrorKind::data, "no prediction for document '" + doc.id + "'");
      pairs.push_back({doc.id, it->second->tree, *tree, doc.paragraph_count()});
      by_id.erase(it);
    }
    if (!by_id.empty()) fail(ErrorKind::data, "prediction for unknown document '" + by_id.begin()->first + "'");
    *out = new mdt_report{corpus_eval(pairs, config)};
  });
}

void mdt_report_free(mdt_report* report) { delete report; }

void mdt_report_counts(const mdt_report* report, size_t* matched, size_t* total) {
  if (!report) return;
  if (matched) *matched = report->report.overall.matched;
  if (total) *total = report->report.overall.total;
}

double mdt_report_accuracy(const mdt_report* report) { return report ? report->report.span_accuracy() : 0.0; }

mdt_status mdt_report_json(const mdt_report* report, char** out) {
  MDT_REQUIRE(report && out, "mdt_report_json: null argument");
  return guarded([&] { *out = dup_string(report_json(report->report)); });
}

mdt_status mdt_report_table(const mdt_report* report, int by_layer, int by_length, char** out) {
  MDT_REQUIRE(report && out, "mdt_report_table: null argument");
  return guarded([&] { *out = dup_string(report_table(report->report, by_layer != 0, by_length != 0)); });
}

mdt_status mdt_report_csv(const mdt_report* report, char** out) {
  MDT_REQUIRE(report && out, "mdt_report_csv: null argument");
  return guarded([&] { *out = dup_string(report_csv(report->report)); });
}

mdt_status mdt_shape_stats_file(const char* path, const char* field, char** csv) {
  MDT_REQUIRE(path && csv, "mdt_shape_stats_file: null argument");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::config, std::string("cannot open '") + path + "'");
    std::vector<DiscourseTree> trees;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string where = std::string(path) + ":" + std::to_string(line_no) + ": ";
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::data, where + "invalid JSON: " + e.what());
      }
      if (!j.is_object()) fail(ErrorKind::data, where + "record is not a JSON object");
      std::string key;
      if (field) {
        key = field;
      } else {
        for (const char* candidate : {"pred_tree", "silver_tree", "gold_tree"})
          if (j.contains(candidate) && j[candidate].is_string()) {
            key = candidate;
            break;
          }
      }
      if (key.empty() || !j.contains(key) || !j[key].is_string())
        fail(ErrorKind::data, where + "no tree field" + (field ? std::string(" '") + field + "'" : std::string()));
      try {
        auto tree = DiscourseTree::parse(j[key].get<std::string>());
        if (auto problems = validate(tree, tree.leaf_count()); !problems.empty())
          fail(ErrorKind::data, problems.front());
        trees.push_back(std::move(tree));
      } catch (const Error& e) {
        fail(ErrorKind::data, where + e.what());
      }
    }
    std::string out = "leaves,shapes\n";
    for (const auto& [n, count] : shape_distribution(trees))
      out += std::to_string(n) + "," + std::to_string(count) + "\n";
    *csv = dup_string(out);
  });
}

}  // extern "C"
