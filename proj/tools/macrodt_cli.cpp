// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "macrodt/macrodt.h"

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kConfig = 2, kData = 3, kScorer = 4 };

int exit_code_for(mdt_status status) {
  switch (status) {
    case MDT_OK: return kOk;
    case MDT_ERR_ARGUMENT:
    case MDT_ERR_CONFIG: return kConfig;
    case MDT_ERR_DATA:
    case MDT_ERR_STRUCTURAL:
    case MDT_ERR_IO: return kData;
    case MDT_ERR_SCORER:
    case MDT_ERR_CAPABILITY: return kScorer;
    case MDT_ERR_INTERNAL: return kInternal;
  }
  return kInternal;
}

// Thrown to unwind to main with an exit code.
struct Exit {
  int code;
};

void check(mdt_status status) {
  if (status == MDT_OK) return;
  std::cerr << "macrodt: " << mdt_status_name(status) << ": " << mdt_last_error() << "\n";
  throw Exit{exit_code_for(status)};
}

[[noreturn]] void config_error(const std::string& message) {
  std::cerr << "macrodt: config error: " << message << "\n";
  throw Exit{kConfig};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using CorpusPtr = std::unique_ptr<mdt_corpus, Deleter<mdt_corpus, mdt_corpus_free>>;
using PredictionsPtr = std::unique_ptr<mdt_predictions, Deleter<mdt_predictions, mdt_predictions_free>>;
using ReportPtr = std::unique_ptr<mdt_report, Deleter<mdt_report, mdt_report_free>>;

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { mdt_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

CorpusPtr load(const std::string& path) {
  mdt_corpus* c = nullptr;
  check(mdt_corpus_load(path.c_str(), &c));
  return CorpusPtr(c);
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      std::cerr << "macrodt: io error: cannot write '" << path << "'\n";
      throw Exit{kData};
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    std::cerr << "macrodt: io error: cannot write '" << path << "'\n";
    throw Exit{kData};
  }
}

void verify_oracle(const mdt_corpus* corpus) {
  size_t violations = 0;
  OwnedString report;
  check(mdt_corpus_verify_oracle(corpus, &violations, &report.p));
  if (violations > 0) {
    std::cerr << report.str();
    std::cerr << "macrodt: data error: " << violations << " oracle violation(s)\n";
    throw Exit{kData};
  }
  std::cerr << "verify: every silver tree respects the topic structure\n";
}

std::vector<size_t> parse_edges(const std::string& text) {
  std::vector<size_t> edges;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      const auto v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      edges.push_back(v);
    } catch (const std::exception&) {
      config_error("bad bucket edge '" + item + "' in --length-edges");
    }
  }
  if (edges.empty()) config_error("--length-edges needs at least one value");
  return edges;
}

struct BuildArgs {
  std::string input, output, method = "result-convert", mode = "bi", scorer;
  double threshold = 0.5;
  int jobs = 1;
};

struct OracleArgs {
  std::string input, output, scorer;
  int folds = 0;
  uint64_t seed = 13;
  int jobs = 1;
  bool verify = false;
};

struct EvalArgs {
  std::string pred, gold, gold_field = "gold_tree", json_out, csv_out, edges;
  bool exclude_root = false, by_layer = false, by_length = false;
};

struct StatsArgs {
  std::string input, field, csv_out;
};

struct PruneArgs {
  std::string input, output;
};

int run_build(const BuildArgs& a, const CLI::App& cmd) {
  mdt_build_options opts;
  mdt_build_options_init(&opts);
  if (a.method == "result-convert") opts.method = MDT_METHOD_RESULT_CONVERT;
  else if (a.method == "shift-reduce") opts.method = MDT_METHOD_SHIFT_REDUCE;
  else if (a.method == "blink") opts.method = MDT_METHOD_BLINK;
  else if (a.method == "oracle") opts.method = MDT_METHOD_ORACLE;
  if (cmd.count("--mode") && opts.method != MDT_METHOD_BLINK) config_error("--mode only applies to --method blink");
  if (cmd.count("--threshold") && opts.method != MDT_METHOD_SHIFT_REDUCE)
    config_error("--threshold only applies to --method shift-reduce");
  opts.mode = a.mode == "down" ? MDT_BLINK_DOWN : a.mode == "up" ? MDT_BLINK_UP : MDT_BLINK_BI;
  opts.threshold = a.threshold;
  opts.jobs = a.jobs;

  auto corpus = load(a.input);
  mdt_predictions* raw = nullptr;
  check(mdt_build(corpus.get(), a.scorer.c_str(), &opts, &raw));
  PredictionsPtr preds(raw);
  check(mdt_predictions_save(preds.get(), a.output.c_str()));
  std::cerr << "build: wrote " << mdt_predictions_size(preds.get()) << " prediction(s) to " << a.output << "\n";
  return kOk;
}

int run_oracle(const OracleArgs& a, bool require_folds) {
  if (require_folds && a.folds < 2) config_error("silver-gen needs --folds of at least 2");
  mdt_oracle_options opts;
  mdt_oracle_options_init(&opts);
  opts.folds = a.folds;
  opts.seed = a.seed;
  opts.jobs = a.jobs;

  auto corpus = load(a.input);
  mdt_corpus* raw = nullptr;
  check(mdt_oracle_annotate(corpus.get(), a.scorer.c_str(), &opts, &raw));
  CorpusPtr silver(raw);
  if (a.verify) verify_oracle(silver.get());
  check(mdt_corpus_save(silver.get(), a.output.c_str()));
  std::cerr << "oracle: wrote " << mdt_corpus_size(silver.get()) << " silver document(s) to " << a.output << "\n";
  return kOk;
}

int run_eval(const EvalArgs& a) {
  mdt_eval_options opts;
  mdt_eval_options_init(&opts);
  opts.include_root = a.exclude_root ? 0 : 1;
  opts.gold_field = a.gold_field.c_str();
  std::vector<size_t> edges;
  if (!a.edges.empty()) {
    edges = parse_edges(a.edges);
    opts.length_edges = edges.data();
    opts.length_edge_count = edges.size();
  }
  mdt_report* raw = nullptr;
  check(mdt_evaluate_files(a.pred.c_str(), a.gold.c_str(), &opts, &raw));
  ReportPtr report(raw);

  OwnedString table, json, csv;
  check(mdt_report_table(report.get(), a.by_layer, a.by_length, &table.p));
  check(mdt_report_json(report.get(), &json.p));
  check(mdt_report_csv(report.get(), &csv.p));
  if (!a.json_out.empty()) write_atomic(a.json_out, json.str());
  if (!a.csv_out.empty()) write_atomic(a.csv_out, csv.str());
  std::cout << table.str();
  return kOk;
}

int run_stats(const StatsArgs& a) {
  OwnedString csv;
  check(mdt_shape_stats_file(a.input.c_str(), a.field.empty() ? nullptr : a.field.c_str(), &csv.p));
  if (!a.csv_out.empty()) write_atomic(a.csv_out, csv.str());
  std::cout << csv.str();
  return kOk;
}

int run_prune(const PruneArgs& a) {
  auto corpus = load(a.input);
  mdt_corpus* raw = nullptr;
  check(mdt_corpus_prune(corpus.get(), &raw));
  CorpusPtr pruned(raw);
  check(mdt_corpus_save(pruned.get(), a.output.c_str()));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Macro-level discourse tree construction from topic segmentation signals"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mdt_version()));

  const std::string scorer_help =
      "Scorer spec: file:PATH | lexical[:WINDOW] | const:P | extern:COMMAND | derived:SPEC "
      "(derived: adds pointer scores split=p, combine=1-p to a segmentation scorer)";

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "Build one tree per document; writes {\"id\",\"pred_tree\"} JSONL");
  build_cmd->add_option("-i,--input", build.input, "Document JSONL corpus")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("-o,--output", build.output, "Predictions JSONL to write")->required();
  build_cmd->add_option("--method", build.method, "result-convert | shift-reduce | blink | oracle")
      ->check(CLI::IsMember({"result-convert", "shift-reduce", "blink", "oracle"}));
  build_cmd->add_option("--mode", build.mode, "BLINK direction: bi | down | up")
      ->check(CLI::IsMember({"bi", "down", "up"}));
  build_cmd->add_option("--scorer", build.scorer, scorer_help)->required();
  build_cmd->add_option("--threshold", build.threshold, "Shift-reduce coherence threshold (reduce when >=)")
      ->check(CLI::Range(0.0, 1.0));
  build_cmd->add_option("-j,--jobs", build.jobs, "Worker threads")->check(CLI::PositiveNumber);

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle-annotate", "Attach oracle-annotated silver trees (tier silver)");
  oracle_cmd->add_option("-i,--input", oracle.input, "Document JSONL corpus")->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("-o,--output", oracle.output, "Silver corpus JSONL to write")->required();
  oracle_cmd->add_option("--scorer", oracle.scorer, scorer_help + "; {fold} expands to the fold index")->required();
  oracle_cmd->add_option("--folds", oracle.folds, "Cross-validation folds (0: one scorer for all)")
      ->check(CLI::NonNegativeNumber);
  oracle_cmd->add_option("--seed", oracle.seed, "Fold shuffle seed");
  oracle_cmd->add_option("-j,--jobs", oracle.jobs, "Worker threads")->check(CLI::PositiveNumber);
  oracle_cmd->add_flag("--verify", oracle.verify, "Re-check the topic constraints on every silver tree");

  OracleArgs silver;
  silver.folds = 10;
  auto* silver_cmd = app.add_subcommand("silver-gen", "k-fold silver corpus generation by oracle annotation");
  silver_cmd->add_option("-i,--input", silver.input, "Document JSONL corpus")->required()->check(CLI::ExistingFile);
  silver_cmd->add_option("-o,--output", silver.output, "Silver corpus JSONL to write")->required();
  silver_cmd->add_option("--scorer", silver.scorer, scorer_help + "; {fold} expands to the fold index")->required();
  silver_cmd->add_option("--folds", silver.folds, "Cross-validation folds")->check(CLI::PositiveNumber);
  silver_cmd->add_option("--seed", silver.seed, "Fold shuffle seed");
  silver_cmd->add_option("-j,--jobs", silver.jobs, "Worker threads")->check(CLI::PositiveNumber);
  silver_cmd->add_flag("--verify", silver.verify, "Re-check the topic constraints on every silver tree");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Span accuracy of predictions against gold trees");
  eval_cmd->add_option("--pred", eval.pred, "Predictions JSONL")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold", eval.gold, "Document JSONL with reference trees")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold-field", eval.gold_field, "Reference tree field")
      ->check(CLI::IsMember({"gold_tree", "silver_tree"}));
  eval_cmd->add_option("--json", eval.json_out, "Write the JSON report here");
  eval_cmd->add_option("--csv", eval.csv_out, "Write per-bucket CSV series here");
  eval_cmd->add_option("--length-edges", eval.edges, "Lower edges of paragraph-count buckets (default 2,5,8,11)");
  eval_cmd->add_flag("--exclude-root", eval.exclude_root, "Do not count the root span");
  eval_cmd->add_flag("--by-layer", eval.by_layer, "Print top2/middle/bottom2 rows");
  eval_cmd->add_flag("--by-length", eval.by_length, "Print paragraph-count bucket rows");

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Distinct tree shapes per leaf count");
  stats_cmd->add_option("-i,--input", stats.input, "JSONL with tree fields")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--field", stats.field, "Tree field (default: pred_tree, silver_tree, then gold_tree)");
  stats_cmd->add_option("--csv", stats.csv_out, "Also write the table here");

  PruneArgs prune;
  auto* prune_cmd = app.add_subcommand("prune", "Collapse unit-level trees to paragraph leaves");
  prune_cmd->add_option("-i,--input", prune.input, "Document JSONL corpus")->required()->check(CLI::ExistingFile);
  prune_cmd->add_option("-o,--output", prune.output, "Paragraph-level corpus JSONL to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*build_cmd) return run_build(build, *build_cmd);
    if (*oracle_cmd) return run_oracle(oracle, false);
    if (*silver_cmd) return run_oracle(silver, true);
    if (*eval_cmd) return run_eval(eval);
    if (*stats_cmd) return run_stats(stats);
    if (*prune_cmd) return run_prune(prune);
  } catch (const Exit& e) {
    return e.code;
  }
  return kInternal;
}
