// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../oracles.hpp"
#include "../test_util.hpp"
#include "macrodt/builders.hpp"
#include "macrodt/corpus.hpp"
#include "macrodt/eval.hpp"
#include "macrodt/ranking.hpp"
#include "macrodt/scorers.hpp"

using namespace macrodt;
using testutil::VectorScorer;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> random_probs(size_t m, std::mt19937_64& rng, int levels = 0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(m);
  for (auto& v : out) v = levels > 0 ? std::floor(u(rng) * levels) / levels : u(rng);
  return out;
}

// 1 ---------------------------------------------------------------------------
Outcome duality() {
  Outcome o;
  const auto start = Clock::now();
  size_t checked = 0;
  auto check = [&](int n, const std::vector<int64_t>& r) {
    const BoundaryRanking ranking(r);
    auto td = tree_from_ranks(static_cast<size_t>(n), ranking, Direction::top_down);
    auto bu = tree_from_ranks(static_cast<size_t>(n), ranking, Direction::bottom_up);
    ++checked;
    if (!(td == bu)) o.fail("n=" + std::to_string(n) + ": " + td.to_string() + " vs " + bu.to_string());
    if (td.to_string() != oracle::merge_simulation(n, r)) o.fail("n=" + std::to_string(n) + ": merge oracle disagrees");
  };
  for (int n = 1; n <= 6; ++n)
    for (const auto& r : oracle::all_rankings(n - 1)) check(n, r);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pick(7, 10);
  for (int i = 0; i < 1000; ++i) {
    const int n = pick(rng);
    check(n, oracle::random_ranking(n - 1, rng));
  }
  const double secs = seconds_since(start);
  if (secs >= 10.0) o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) o.detail = std::to_string(checked) + " rankings, " + std::to_string(secs) + " s";
  return o;
}

// 2 ---------------------------------------------------------------------------
Outcome worked_example() {
  Outcome o;
  VectorScorer s;
  s.seg = {0.2, 0.7, 0.4, 0.5};
  auto doc = synthetic_document("five", 5);
  auto tree = result_convert(doc, s);
  if (tree.to_string() != "((0 1) ((2 3) 4))") o.fail("tree " + tree.to_string());
  // Split order: boundary after sentence 2, then after 4, then after 3.
  auto order = BoundaryRanking::from_scores(s.seg).descending();
  if (order.size() < 3 || order[0] != 1 || order[1] != 3 || order[2] != 2) o.fail("unexpected split order");
  auto unique = oracle::tree_for_ranks(5, {2, 4, 1, 3});
  if (!unique || oracle::text(*unique) != tree.to_string()) o.fail("enumeration disagrees");
  if (o.pass) o.detail = tree.to_string();
  return o;
}

// 3 ---------------------------------------------------------------------------
Outcome oracle_dominance() {
  Outcome o;
  std::mt19937_64 rng(3);
  size_t pairs = 0;
  for (int i = 0; i < 1000; ++i) {
    const size_t n = 2 + rng() % 11;
    std::vector<int32_t> topics;
    for (size_t b = 0; b + 1 < n; ++b)
      if (rng() % 3 == 0) topics.push_back(static_cast<int32_t>(b));
    auto doc = synthetic_document("r" + std::to_string(i), n, topics);
    VectorScorer s;
    s.seg = random_probs(n - 1, rng);
    auto tree = oracle_annotate(doc, s);

    std::vector<UnitSpan> span_of(n - 1);
    std::set<UnitSpan> spans;
    for (DiscourseTree::NodeId id = 0; id <= tree.root_id(); ++id) {
      spans.insert(tree.node(id).span);
      if (!tree.node(id).is_leaf()) span_of[static_cast<size_t>(tree.split_boundary(id))] = tree.node(id).span;
    }
    auto covers = [](UnitSpan s, int32_t b) { return s.first <= b && b < s.last; };
    for (int32_t g : doc.topic_boundaries)
      for (int32_t b = 0; b + 1 < static_cast<int32_t>(n); ++b) {
        if (doc.is_topic_boundary(b)) continue;
        const auto sg = span_of[static_cast<size_t>(g)];
        const auto sb = span_of[static_cast<size_t>(b)];
        if (covers(sb, g)) o.fail(doc.id + ": in-topic split " + std::to_string(b) + " above topic boundary " + std::to_string(g));
        if (covers(sg, b)) {
          ++pairs;
          const bool strict = sg.first <= sb.first && sb.last <= sg.last && !(sg == sb);
          if (!strict) o.fail(doc.id + ": node of " + std::to_string(g) + " is not an ancestor of " + std::to_string(b));
        }
      }
    for (const auto& block : doc.topic_blocks())
      if (!spans.count(block)) o.fail(doc.id + ": topic block is not a span");
  }
  if (o.pass) o.detail = "1000 documents, " + std::to_string(pairs) + " ancestor pairs";
  return o;
}

// 4 ---------------------------------------------------------------------------
Outcome label_mapping() {
  Outcome o;
  for (int label : {0, 1}) {
    if (LabelMapping::label(LabelMapping::transition_of(label)) != label) o.fail("transition round-trip");
    if (LabelMapping::label(LabelMapping::pointer_action_of(label)) != label) o.fail("pointer round-trip");
    if (LabelMapping::label(LabelMapping::coherence_of(label)) != label) o.fail("coherence round-trip");
    if (LabelMapping::transition_of(LabelMapping::label(LabelMapping::coherence_of(label))) !=
        (label == 0 ? TransitionAction::reduce : TransitionAction::shift))
      o.fail("coherent must map to reduce");
  }
  ConstantScorer coherent(1.0), incoherent(0.0);
  for (size_t n = 1; n <= 10; ++n) {
    auto doc = synthetic_document("d", n);
    std::string left = "0", right = std::to_string(n - 1);
    for (size_t i = 1; i < n; ++i) left = "(" + left + " " + std::to_string(i) + ")";
    for (size_t i = n - 1; i-- > 0;) right = "(" + std::to_string(i) + " " + right + ")";
    auto l = shift_reduce(doc, coherent);
    auto r = shift_reduce(doc, incoherent);
    if (l.tree.to_string() != left) o.fail("n=" + std::to_string(n) + " coherent gave " + l.tree.to_string());
    if (r.tree.to_string() != right) o.fail("n=" + std::to_string(n) + " incoherent gave " + r.tree.to_string());
    if (l.actions.size() != 2 * n - 1 || r.actions.size() != 2 * n - 1) o.fail("action count");
  }
  if (o.pass) o.detail = "n = 1..10";
  return o;
}

// 5 ---------------------------------------------------------------------------
Outcome blink_modes() {
  Outcome o;
  std::mt19937_64 rng(5);
  size_t mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const size_t n = 2 + rng() % 11;
    const int levels = i % 4 == 0 ? 3 : 0;  // some cases with tied scores
    auto doc = synthetic_document("b" + std::to_string(i), n);

    VectorScorer seg;
    seg.seg = random_probs(n - 1, rng, levels);
    VectorScorer down;
    down.split = seg.seg;
    down.combine = random_probs(n - 1, rng, levels);
    if (!(blink_decode(doc, down, BlinkMode::down_only).tree == result_convert(doc, seg))) {
      ++mismatches;
      o.fail(doc.id + ": down_only differs from result_convert");
    }

    VectorScorer up, neg;
    up.combine = random_probs(n - 1, rng, levels);
    up.split = random_probs(n - 1, rng, levels);
    neg.split = up.combine;
    for (auto& v : neg.split) v = -v;
    neg.combine = up.split;
    if (!(blink_decode(doc, up, BlinkMode::up_only).tree == blink_decode(doc, neg, BlinkMode::down_only).tree)) {
      ++mismatches;
      o.fail(doc.id + ": up_only(c) differs from down_only(-c)");
    }

    auto bi = blink_decode(doc, up, BlinkMode::bidirectional);
    const auto& st = bi.final_state;
    std::set<int32_t> assigned(st.merged.begin(), st.merged.end());
    assigned.insert(st.split_committed.begin(), st.split_committed.end());
    if (!st.unassigned.empty() || assigned.size() != n - 1 || st.merged.size() + st.split_committed.size() != n - 1 ||
        !validate(bi.tree, n).empty()) {
      ++mismatches;
      o.fail(doc.id + ": bidirectional left boundaries unassigned or built an invalid tree");
    }
  }
  if (o.pass) o.detail = "1000 cases, 0 mismatches";
  else o.detail += " (" + std::to_string(mismatches) + " mismatches)";
  return o;
}

// 6 ---------------------------------------------------------------------------
Outcome span_accuracy_fixture() {
  Outcome o;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    const size_t n = 1 + rng() % 12;
    auto t = tree_from_ranks(n, BoundaryRanking(oracle::random_ranking(static_cast<int>(n) - 1, rng)));
    if (span_accuracy(t, t).accuracy() != 1.0) o.fail("self-evaluation below 1.0");
  }
  auto a_pred = DiscourseTree::parse("((0 1) (2 3))");
  auto a_gold = DiscourseTree::parse("(((0 1) 2) 3)");
  auto b_tree = DiscourseTree::parse("((0 1) ((2 3) 4))");
  if (!(span_accuracy(a_pred, a_gold) == SpanCount{2, 3})) o.fail("first document is not 2/3");
  if (!(span_accuracy(b_tree, b_tree) == SpanCount{4, 4})) o.fail("second document is not 4/4");
  auto report = corpus_eval({{"a", a_pred, a_gold, 0}, {"b", b_tree, b_tree, 0}});
  if (!(report.overall == SpanCount{6, 7})) o.fail("pooled counts are not 6/7");
  const double mean = (2.0 / 3.0 + 1.0) / 2.0;
  if (report.span_accuracy() == mean) o.fail("reported the mean of per-document accuracies");
  if (o.pass) o.detail = "pooled " + std::to_string(report.overall.matched) + "/" + std::to_string(report.overall.total);
  return o;
}

// 7 ---------------------------------------------------------------------------
Outcome catalan_shapes() {
  Outcome o;
  const std::vector<size_t> expected{1, 1, 2, 5, 14, 42, 132, 429};
  std::ostringstream got;
  for (int n = 1; n <= 8; ++n) {
    std::vector<DiscourseTree> trees;
    for (const auto& r : oracle::all_rankings(n - 1)) trees.push_back(tree_from_ranks(static_cast<size_t>(n), BoundaryRanking(r)));
    const auto dist = shape_distribution(trees);
    const size_t count = dist.count(static_cast<size_t>(n)) ? dist.at(static_cast<size_t>(n)) : 0;
    got << (n > 1 ? ", " : "") << count;
    if (count != expected[static_cast<size_t>(n - 1)]) o.fail("n=" + std::to_string(n) + " gave " + std::to_string(count));
  }
  if (o.pass) o.detail = got.str();
  return o;
}

// 8 ---------------------------------------------------------------------------
struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + MACRODT_CLI + "' " + args + " 2>/dev/null";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Outcome pipeline_determinism() {
  Outcome o;
  const auto start = Clock::now();
  testutil::TempDir dir;

  // 50 documents drawn from a few vocabularies, one vocabulary per topic.
  const std::vector<std::vector<std::string>> vocab{{"market", "stock", "price", "trade", "bank"},
                                                    {"river", "flood", "rain", "water", "dam"},
                                                    {"league", "match", "goal", "team", "coach"},
                                                    {"virus", "vaccine", "doctor", "clinic", "trial"}};
  std::mt19937_64 rng(8);
  CorpusManifest corpus;
  for (int d = 0; d < 50; ++d) {
    const size_t n = 4 + rng() % 9;
    Document doc = synthetic_document("doc" + std::to_string(d), n);
    size_t topic = rng() % vocab.size();
    for (size_t u = 0; u < n; ++u) {
      if (u > 0 && rng() % 4 == 0) {
        topic = (topic + 1 + rng() % (vocab.size() - 1)) % vocab.size();
        doc.topic_boundaries.push_back(static_cast<int32_t>(u - 1));
      }
      std::string text;
      for (int w = 0; w < 6; ++w) text += (w ? " " : "") + vocab[topic][rng() % vocab[topic].size()];
      doc.units[u].text = text;
    }
    doc.gold_tree = tree_from_ranks(n, BoundaryRanking(oracle::random_ranking(static_cast<int>(n) - 1, rng)));
    doc.tier = Tier::gold;
    corpus.documents.push_back(std::move(doc));
  }
  save_corpus(corpus, dir.file("corpus.jsonl"));

  // Per-fold probability files stand in for ten models trained elsewhere.
  for (int f = 0; f < 10; ++f) {
    std::string lines;
    for (const auto& doc : corpus.documents) {
      nlohmann::json j;
      j["id"] = doc.id;
      j["seg_prob"] = nlohmann::json::array();
      for (size_t b = 0; b < doc.boundary_count(); ++b)
        j["seg_prob"].push_back(static_cast<double>((b * 31 + static_cast<size_t>(f) * 17 + doc.id.size()) % 97) / 97.0);
      lines += j.dump() + "\n";
    }
    testutil::write_file(dir.file("fold" + std::to_string(f) + ".jsonl"), lines);
  }

  const std::string seed = "2024";
  const std::string silver_args = "silver-gen -i " + dir.file("corpus.jsonl") + " --folds 10 --seed " + seed +
                                  " --verify --scorer file:" + dir.file("fold{fold}.jsonl");
  auto s1 = run_cli(silver_args + " -o " + dir.file("silver1.jsonl"));
  auto s2 = run_cli(silver_args + " -j 4 -o " + dir.file("silver2.jsonl"));
  if (s1.code != 0 || s2.code != 0) o.fail("silver-gen exited with " + std::to_string(s1.code) + "/" + std::to_string(s2.code));
  const auto m1 = testutil::read_file(dir.file("silver1.jsonl"));
  const auto m2 = testutil::read_file(dir.file("silver2.jsonl"));
  if (m1.empty() || m1 != m2) o.fail("silver manifests differ");
  try {
    auto silver = load_corpus(dir.file("silver1.jsonl"));
    if (silver.size() != 50) o.fail("silver manifest has " + std::to_string(silver.size()) + " documents");
    for (const auto& d : silver.documents)
      if (!d.silver_tree || !oracle_violations(d, *d.silver_tree).empty()) o.fail(d.id + ": silver tree missing or invalid");
  } catch (const std::exception& e) {
    o.fail(e.what());
  }

  std::vector<std::string> replay;
  for (int rep = 0; rep < 2; ++rep) {
    const auto pred = dir.file("pred" + std::to_string(rep) + ".jsonl");
    auto b = run_cli("build -i " + dir.file("corpus.jsonl") + " -o " + pred + " --method result-convert --scorer lexical" +
                     (rep ? " -j 4" : ""));
    auto e = run_cli("evaluate --pred " + pred + " --gold " + dir.file("corpus.jsonl") + " --by-layer --by-length");
    if (b.code != 0 || e.code != 0) o.fail("build/evaluate exited with " + std::to_string(b.code) + "/" + std::to_string(e.code));
    replay.push_back(testutil::read_file(pred) + e.out);
  }
  if (replay[0].empty() || replay[0] != replay[1]) o.fail("build/evaluate replay differs");

  const double secs = seconds_since(start);
  if (secs >= 30.0) o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) o.detail = "50 documents, " + std::to_string(secs) + " s";
  return o;
}

// 9 ---------------------------------------------------------------------------
Outcome external_protocol() {
  Outcome o;
  size_t pointer_requests = 0;
  try {
    ExternalScorer scorer(ECHO_SCORER);
    std::vector<int32_t> expected_unassigned;
    std::vector<int32_t> prev_merged, prev_split;
    bool first = true;
    scorer.set_trace([&](const std::string& request, const std::string& response) {
      auto req = nlohmann::json::parse(request);
      if (req.value("op", "") != "pointer") return;
      ++pointer_requests;
      auto res = nlohmann::json::parse(response);
      const auto unassigned = req["unassigned"].get<std::vector<int32_t>>();
      const auto merged = req["merged"].get<std::vector<int32_t>>();
      const auto split = req["split"].get<std::vector<int32_t>>();
      if (!first) {
        const bool subset = std::includes(expected_unassigned.begin(), expected_unassigned.end(), unassigned.begin(),
                                          unassigned.end());
        if (!subset || unassigned.size() + 1 != expected_unassigned.size())
          o.fail("request domain does not follow the previous step");
      }
      if (!first) {
        // Exactly one boundary moved from unassigned to merged or split.
        const bool grew_merged = merged.size() == prev_merged.size() + 1 && split == prev_split;
        const bool grew_split = split.size() == prev_split.size() + 1 && merged == prev_merged;
        if (!grew_merged && !grew_split) o.fail("decoder state advanced by other than one action");
      }
      for (const char* key : {"combine", "split"}) {
        std::vector<int32_t> domain;
        for (const auto& [k, v] : res[key].items()) domain.push_back(std::stoi(k));
        std::sort(domain.begin(), domain.end());
        if (domain != unassigned) o.fail(std::string("response '") + key + "' domain differs from the request");
      }
      prev_merged = merged;
      prev_split = split;
      first = false;
      expected_unassigned = unassigned;
    });

    for (size_t n = 2; n <= 12; ++n) {
      auto doc = synthetic_document("x" + std::to_string(n), n);
      first = true;
      const size_t before = pointer_requests;
      auto result = blink_decode(doc, scorer, BlinkMode::bidirectional);
      if (pointer_requests - before != n - 1) o.fail("expected one pointer request per boundary");
      if (!validate(result.tree, n).empty()) o.fail("invalid tree");
      // Replay the decoder's actions against the traced states.
      std::vector<int32_t> unassigned(n - 1);
      for (size_t b = 0; b + 1 < n; ++b) unassigned[b] = static_cast<int32_t>(b);
      for (const auto& step : result.actions) {
        auto it = std::find(unassigned.begin(), unassigned.end(), step.boundary);
        if (it == unassigned.end()) o.fail("action on an assigned boundary");
        else unassigned.erase(it);
      }
      if (!unassigned.empty()) o.fail("boundaries left unassigned");
    }
  } catch (const std::exception& e) {
    o.fail(std::string("protocol violation: ") + e.what());
  }
  if (o.pass) o.detail = std::to_string(pointer_requests) + " pointer exchanges";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 duality of top-down and bottom-up construction", duality},
      {"2 worked five-unit split order", worked_example},
      {"3 oracle dominance of topic boundaries", oracle_dominance},
      {"4 label/action mapping and shift-reduce extremes", label_mapping},
      {"5 pointer decoder mode equivalences", blink_modes},
      {"6 span accuracy fixture (pooled 6/7)", span_accuracy_fixture},
      {"7 distinct shapes follow the Catalan numbers", catalan_shapes},
      {"8 pipeline determinism", pipeline_determinism},
      {"9 external scorer protocol", external_protocol},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " -- " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (criteria.size() - static_cast<size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
