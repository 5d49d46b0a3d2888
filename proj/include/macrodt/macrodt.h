/*
 * C interface to the macro discourse tree toolkit.
 *
 * Every object is an opaque handle created by a *_create / *_load / *_parse
 * call and released with the matching *_free. Functions return an
 * mdt_status; on failure mdt_last_error() describes the problem for the
 * calling thread. Strings handed out through `char**` are heap-allocated
 * and must be released with mdt_string_free().
 */
#ifndef MACRODT_MACRODT_H_
#define MACRODT_MACRODT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MACRODT_BUILDING)
#define MDT_API __declspec(dllexport)
#else
#define MDT_API __declspec(dllimport)
#endif
#else
#define MDT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mdt_status {
  MDT_OK = 0,
  MDT_ERR_ARGUMENT = 1,   /* null handle or out-of-range argument */
  MDT_ERR_CONFIG = 2,     /* bad option, unreadable input, unknown scorer spec */
  MDT_ERR_DATA = 3,       /* corpus or prediction content is invalid */
  MDT_ERR_SCORER = 4,     /* scorer backend failed */
  MDT_ERR_CAPABILITY = 5, /* scorer lacks the requested signal */
  MDT_ERR_STRUCTURAL = 6, /* malformed tree, ranking or decoder state */
  MDT_ERR_IO = 7,         /* output could not be written */
  MDT_ERR_INTERNAL = 8
} mdt_status;

typedef enum mdt_direction { MDT_TOP_DOWN = 0, MDT_BOTTOM_UP = 1 } mdt_direction;

typedef enum mdt_method {
  MDT_METHOD_RESULT_CONVERT = 0,
  MDT_METHOD_ORACLE = 1,
  MDT_METHOD_SHIFT_REDUCE = 2,
  MDT_METHOD_BLINK = 3
} mdt_method;

typedef enum mdt_blink_mode { MDT_BLINK_BI = 0, MDT_BLINK_DOWN = 1, MDT_BLINK_UP = 2 } mdt_blink_mode;

enum {
  MDT_CAP_SEGMENTATION = 1,
  MDT_CAP_COHERENCE = 2,
  MDT_CAP_POINTER = 4
};

typedef struct mdt_tree mdt_tree;
typedef struct mdt_corpus mdt_corpus;
typedef struct mdt_scorer mdt_scorer;
typedef struct mdt_predictions mdt_predictions;
typedef struct mdt_report mdt_report;

MDT_API const char* mdt_version(void);
MDT_API const char* mdt_last_error(void);
MDT_API const char* mdt_status_name(mdt_status status);
MDT_API void mdt_string_free(char* s);

/* Trees ------------------------------------------------------------------ */

MDT_API mdt_status mdt_tree_parse(const char* text, mdt_tree** out);
/* ranks: one distinct value per boundary (leaf_count - 1 entries). */
MDT_API mdt_status mdt_tree_from_ranks(size_t leaf_count, const int64_t* ranks, size_t rank_count,
                                       mdt_direction direction, mdt_tree** out);
MDT_API void mdt_tree_free(mdt_tree* tree);
MDT_API size_t mdt_tree_leaf_count(const mdt_tree* tree);
MDT_API int mdt_tree_equal(const mdt_tree* a, const mdt_tree* b);
MDT_API mdt_status mdt_tree_text(const mdt_tree* tree, char** out);
MDT_API mdt_status mdt_tree_shape(const mdt_tree* tree, char** out);
/* Writes leaf_count - 1 ranks into `ranks` (capacity `cap`). */
MDT_API mdt_status mdt_tree_ranks(const mdt_tree* tree, int64_t* ranks, size_t cap);
/* Newline-separated violations (empty string when valid). */
MDT_API mdt_status mdt_tree_validate(const mdt_tree* tree, size_t leaf_count, size_t* violation_count,
                                     char** report);
MDT_API mdt_status mdt_span_accuracy(const mdt_tree* pred, const mdt_tree* gold, int include_root,
                                     size_t* matched, size_t* total);

/* Corpora ---------------------------------------------------------------- */

MDT_API mdt_status mdt_corpus_load(const char* path, mdt_corpus** out);
MDT_API mdt_status mdt_corpus_parse(const char* jsonl, mdt_corpus** out);
MDT_API void mdt_corpus_free(mdt_corpus* corpus);
MDT_API size_t mdt_corpus_size(const mdt_corpus* corpus);
/* Borrowed pointer valid while the corpus lives. */
MDT_API const char* mdt_corpus_document_id(const mdt_corpus* corpus, size_t index);
MDT_API mdt_status mdt_corpus_save(const mdt_corpus* corpus, const char* path);
MDT_API mdt_status mdt_corpus_jsonl(const mdt_corpus* corpus, char** out);
MDT_API mdt_status mdt_corpus_assign_folds(mdt_corpus* corpus, int k, uint64_t seed);
/* Returns -1 when folds were not assigned. */
MDT_API int mdt_corpus_fold(const mdt_corpus* corpus, size_t index);
/* Paragraph-level copy of every document, trees pruned. */
MDT_API mdt_status mdt_corpus_prune(const mdt_corpus* corpus, mdt_corpus** out);
/* Checks that every silver tree splits topic boundaries before in-topic
 * boundaries and keeps topic blocks as spans. */
MDT_API mdt_status mdt_corpus_verify_oracle(const mdt_corpus* corpus, size_t* violations, char** report);

/* Scorers ---------------------------------------------------------------- */

/* spec: file:PATH | lexical[:W] | const:P | extern:COMMAND | derived:SPEC */
MDT_API mdt_status mdt_scorer_open(const char* spec, mdt_scorer** out);
MDT_API void mdt_scorer_free(mdt_scorer* scorer);
MDT_API unsigned mdt_scorer_capabilities(const mdt_scorer* scorer);
/* Writes boundary_count probabilities for document `index` of `corpus`. */
MDT_API mdt_status mdt_scorer_seg_prob(mdt_scorer* scorer, const mdt_corpus* corpus, size_t index,
                                       double* out, size_t cap);

/* Builders --------------------------------------------------------------- */

typedef struct mdt_build_options {
  mdt_method method;
  mdt_blink_mode mode;
  double threshold; /* shift-reduce coherence threshold */
  int jobs;
} mdt_build_options;

MDT_API void mdt_build_options_init(mdt_build_options* options);

/* Builds one tree per document. The scorer spec is opened once per worker
 * when the backend cannot be shared. */
MDT_API mdt_status mdt_build(const mdt_corpus* corpus, const char* scorer_spec, const mdt_build_options* options,
                             mdt_predictions** out);
MDT_API mdt_status mdt_build_tree(mdt_scorer* scorer, const mdt_corpus* corpus, size_t index,
                                  const mdt_build_options* options, mdt_tree** out);
MDT_API void mdt_predictions_free(mdt_predictions* predictions);
MDT_API size_t mdt_predictions_size(const mdt_predictions* predictions);
MDT_API mdt_status mdt_predictions_tree_text(const mdt_predictions* predictions, size_t index, char** out);
MDT_API mdt_status mdt_predictions_save(const mdt_predictions* predictions, const char* path);

typedef struct mdt_oracle_options {
  int folds; /* 0: one scorer for every document */
  uint64_t seed;
  int jobs;
} mdt_oracle_options;

MDT_API void mdt_oracle_options_init(mdt_oracle_options* options);

/* Attaches oracle-annotated silver trees (tier "silver"). With folds > 0 the
 * spec may contain "{fold}", replaced by the fold index of each scorer. */
MDT_API mdt_status mdt_oracle_annotate(const mdt_corpus* corpus, const char* scorer_spec,
                                       const mdt_oracle_options* options, mdt_corpus** out);

/* Evaluation ------------------------------------------------------------- */

typedef struct mdt_eval_options {
  int include_root;
  const size_t* length_edges; /* NULL: 2,5,8,11 */
  size_t length_edge_count;
  const char* gold_field; /* "gold_tree" (default) or "silver_tree" */
} mdt_eval_options;

MDT_API void mdt_eval_options_init(mdt_eval_options* options);

/* Pairs predictions with gold documents by id. */
MDT_API mdt_status mdt_evaluate_files(const char* predictions_path, const char* gold_path,
                                      const mdt_eval_options* options, mdt_report** out);
MDT_API void mdt_report_free(mdt_report* report);
MDT_API void mdt_report_counts(const mdt_report* report, size_t* matched, size_t* total);
MDT_API double mdt_report_accuracy(const mdt_report* report);
MDT_API mdt_status mdt_report_json(const mdt_report* report, char** out);
MDT_API mdt_status mdt_report_table(const mdt_report* report, int by_layer, int by_length, char** out);
MDT_API mdt_status mdt_report_csv(const mdt_report* report, char** out);

/* Shape statistics over a JSONL file of trees. `field` names the tree field
 * ("pred_tree", "silver_tree", "gold_tree"); NULL picks the first of those
 * present on each line. Output is CSV rows "leaves,shapes". */
MDT_API mdt_status mdt_shape_stats_file(const char* path, const char* field, char** csv);

#ifdef __cplusplus
}
#endif

#endif /* MACRODT_MACRODT_H_ */
