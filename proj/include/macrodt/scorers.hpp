#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "macrodt/scorer.hpp"

namespace macrodt {

/// Returns the same probability for every boundary and every coherence query.
class ConstantScorer final : public Scorer {
 public:
  explicit ConstantScorer(double p);

  Capabilities capabilities() const override { return {Capability::segmentation, Capability::coherence}; }
  bool shareable() const override { return true; }
  std::string describe() const override;

 protected:
  std::vector<double> do_seg_prob(const Document& doc) override;
  double do_coherence(const Document&, std::optional<UnitSpan>, UnitSpan, UnitSpan) override { return p_; }

 private:
  double p_;
};

/// Precomputed scores read from a probability JSONL file, one record per
/// document:
///   {"id": "...", "seg_prob": [...], "coherence": [...], "combine": [...], "split": [...]}
/// Every array has one entry per boundary and may be omitted. Coherence at a
/// boundary comes from "coherence" when present, else 1 - seg_prob.
class FileScorer final : public Scorer {
 public:
  struct Record {
    std::optional<std::vector<double>> seg_prob;
    std::optional<std::vector<double>> coherence;
    std::optional<std::vector<double>> combine;
    std::optional<std::vector<double>> split;
  };

  explicit FileScorer(const std::string& path);

  Capabilities capabilities() const override { return caps_; }
  bool shareable() const override { return true; }
  std::string describe() const override { return "file scorer '" + path_ + "'"; }

  size_t record_count() const { return records_.size(); }

 protected:
  std::vector<double> do_seg_prob(const Document& doc) override;
  double do_coherence(const Document& doc, std::optional<UnitSpan>, UnitSpan stack_top, UnitSpan) override;
  ActionDistribution do_pointer(const Document& doc, const DecoderState& state) override;

 private:
  const Record& lookup(const Document& doc) const;
  const std::vector<double>& field(const Document& doc, const std::optional<std::vector<double>>& values,
                                   const char* name) const;

  std::string path_;
  Capabilities caps_;
  std::unordered_map<std::string, Record> records_;
};

/// Lexical-cohesion segmentation: cosine similarity between term-frequency
/// vectors of the `window` units on either side of each boundary, turned
/// into depth scores and min-max normalized per document. Tokens are
/// whitespace-separated and lowercased. Coherence = 1 - segmentation score.
class LexicalScorer final : public Scorer {
 public:
  explicit LexicalScorer(int window = 2);

  Capabilities capabilities() const override { return {Capability::segmentation, Capability::coherence}; }
  bool shareable() const override { return true; }
  std::string describe() const override;

  int window() const { return window_; }

  /// Raw block similarities before depth scoring, one per boundary.
  std::vector<double> similarities(const Document& doc) const;

 protected:
  std::vector<double> do_seg_prob(const Document& doc) override;
  double do_coherence(const Document& doc, std::optional<UnitSpan>, UnitSpan stack_top, UnitSpan) override;

 private:
  int window_;
};

/// Adds the pointer signal to a segmentation scorer: split(b) = seg_prob(b),
/// combine(b) = 1 - seg_prob(b). Other signals pass through.
class SegPointerAdapter final : public Scorer {
 public:
  explicit SegPointerAdapter(std::unique_ptr<Scorer> inner);

  Capabilities capabilities() const override;
  bool shareable() const override { return inner_->shareable(); }
  std::string describe() const override { return "pointer adapter over " + inner_->describe(); }

 protected:
  std::vector<double> do_seg_prob(const Document& doc) override;
  double do_coherence(const Document& doc, std::optional<UnitSpan> second, UnitSpan top,
                      UnitSpan front) override;
  ActionDistribution do_pointer(const Document& doc, const DecoderState& state) override;

 private:
  std::vector<double> cached_seg(const Document& doc);

  std::unique_ptr<Scorer> inner_;
  std::mutex mutex_;
  std::string cached_id_;
  std::vector<double> cached_;
};

/// Scorer served by a child process speaking JSON Lines over its standard
/// input and output. One response line per request line, in order.
///
///   {"op":"capabilities"} -> {"capabilities":["segmentation","coherence","pointer"]}
///   {"op":"seg","doc_id":..,"units":[..]} -> {"seg_prob":[..]}
///   {"op":"coherence","doc_id":..,"stack_second":[f,l]|null,"stack_top":[f,l],"queue_front":[f,l]}
///       -> {"coherence":p}
///   {"op":"pointer","doc_id":..,"merged":[..],"split":[..],"unassigned":[..]}
///       -> {"combine":{"b":v,..},"split":{"b":v,..}}
///
/// A response of the form {"error":"..."} fails the call with a scorer error.
class ExternalScorer final : public Scorer {
 public:
  using Trace = std::function<void(const std::string& request, const std::string& response)>;

  explicit ExternalScorer(const std::string& command);
  ~ExternalScorer() override;

  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  Capabilities capabilities() const override { return caps_; }
  bool shareable() const override { return false; }
  std::string describe() const override { return "external scorer '" + command_ + "'"; }

  /// Observer called with every raw request/response line pair.
  void set_trace(Trace trace) { trace_ = std::move(trace); }
  size_t requests_sent() const { return requests_; }

 protected:
  std::vector<double> do_seg_prob(const Document& doc) override;
  double do_coherence(const Document& doc, std::optional<UnitSpan> second, UnitSpan top,
                      UnitSpan front) override;
  ActionDistribution do_pointer(const Document& doc, const DecoderState& state) override;

 private:
  std::string exchange(const std::string& request);
  [[noreturn]] void protocol_error(const std::string& what) const;

  std::string command_;
  int socket_ = -1;
  int pid_ = -1;
  std::string buffer_;
  Capabilities caps_;
  Trace trace_;
  size_t requests_ = 0;
};

/// Scorer from a spec string:
///   file:PATH | lexical | lexical:WINDOW | const:P | extern:COMMAND | derived:SPEC
/// `derived:` wraps any segmentation scorer in SegPointerAdapter. Bad specs
/// and unreadable files raise config errors.
std::unique_ptr<Scorer> make_scorer(std::string_view spec);

/// Validates `spec` by building one scorer up front. The factory hands that
/// instance's siblings to workers; shareable backends are built once and
/// shared through a non-owning wrapper.
ScorerFactory scorer_factory(std::string_view spec);

/// Like scorer_factory, but every "{fold}" in the spec is replaced with the
/// fold index before the scorer is built.
FoldScorerFactory fold_scorer_factory(std::string_view spec);

}  // namespace macrodt
