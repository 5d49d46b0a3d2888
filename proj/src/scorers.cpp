#include "macrodt/scorers.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "macrodt/error.hpp"

namespace macrodt {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// ConstantScorer

ConstantScorer::ConstantScorer(double p) : p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::config, "constant scorer probability must lie in [0,1]");
}

std::string ConstantScorer::describe() const {
  std::ostringstream os;
  os << "constant scorer " << p_;
  return os.str();
}

std::vector<double> ConstantScorer::do_seg_prob(const Document& doc) {
  return std::vector<double>(doc.boundary_count(), p_);
}

// ---------------------------------------------------------------------------
// FileScorer

namespace {

std::optional<std::vector<double>> read_array(const json& rec, const char* key, size_t line,
                                              const std::string& path) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (!it->is_array())
    fail(ErrorKind::config, path + ":" + std::to_string(line) + ": '" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number())
      fail(ErrorKind::config, path + ":" + std::to_string(line) + ": '" + key + "' holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

FileScorer::FileScorer(const std::string& path) : path_(path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open probability file '" + path + "'");
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::config, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string())
      fail(ErrorKind::config, path + ":" + std::to_string(line_no) + ": record needs a string 'id'");
    Record r;
    r.seg_prob = read_array(rec, "seg_prob", line_no, path);
    r.coherence = read_array(rec, "coherence", line_no, path);
    r.combine = read_array(rec, "combine", line_no, path);
    r.split = read_array(rec, "split", line_no, path);
    if (r.seg_prob) caps_.add(Capability::segmentation);
    if (r.seg_prob || r.coherence) caps_.add(Capability::coherence);
    if (r.combine && r.split) caps_.add(Capability::pointer);
    auto id = rec["id"].get<std::string>();
    if (!records_.emplace(id, std::move(r)).second)
      fail(ErrorKind::config, path + ":" + std::to_string(line_no) + ": duplicate id '" + id + "'");
  }
}

const FileScorer::Record& FileScorer::lookup(const Document& doc) const {
  auto it = records_.find(doc.id);
  if (it == records_.end()) fail(ErrorKind::scorer, describe() + " has no record for document '" + doc.id + "'");
  return it->second;
}

const std::vector<double>& FileScorer::field(const Document& doc, const std::optional<std::vector<double>>& values,
                                             const char* name) const {
  if (!values) fail(ErrorKind::capability, describe() + " has no '" + name + "' for document '" + doc.id + "'");
  if (values->size() != doc.boundary_count())
    fail(ErrorKind::scorer, describe() + ": '" + name + "' for document '" + doc.id + "' has " +
                                std::to_string(values->size()) + " values, expected " +
                                std::to_string(doc.boundary_count()));
  return *values;
}

std::vector<double> FileScorer::do_seg_prob(const Document& doc) {
  return field(doc, lookup(doc).seg_prob, "seg_prob");
}

double FileScorer::do_coherence(const Document& doc, std::optional<UnitSpan>, UnitSpan stack_top, UnitSpan) {
  const auto& rec = lookup(doc);
  const auto b = static_cast<size_t>(stack_top.last);
  if (rec.coherence) return field(doc, rec.coherence, "coherence")[b];
  return 1.0 - field(doc, rec.seg_prob, "seg_prob")[b];
}

ActionDistribution FileScorer::do_pointer(const Document& doc, const DecoderState& state) {
  const auto& rec = lookup(doc);
  const auto& combine = field(doc, rec.combine, "combine");
  const auto& split = field(doc, rec.split, "split");
  ActionDistribution d;
  for (auto b : state.unassigned) {
    d.combine.emplace(b, combine[static_cast<size_t>(b)]);
    d.split.emplace(b, split[static_cast<size_t>(b)]);
  }
  return d;
}

// ---------------------------------------------------------------------------
// LexicalScorer

namespace {

using TermCounts = std::map<std::string, double>;

TermCounts count_terms(const std::string& text) {
  TermCounts counts;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    std::transform(tok.begin(), tok.end(), tok.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    counts[tok] += 1.0;
  }
  return counts;
}

double cosine(const TermCounts& a, const TermCounts& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, c] : a) {
    na += c * c;
    auto it = b.find(t);
    if (it != b.end()) dot += c * it->second;
  }
  for (const auto& [t, c] : b) nb += c * c;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

LexicalScorer::LexicalScorer(int window) : window_(window) {
  if (window < 1) fail(ErrorKind::config, "lexical scorer window must be at least 1");
}

std::string LexicalScorer::describe() const { return "lexical scorer (window " + std::to_string(window_) + ")"; }

std::vector<double> LexicalScorer::similarities(const Document& doc) const {
  const auto n = static_cast<int64_t>(doc.size());
  std::vector<TermCounts> unit_terms;
  unit_terms.reserve(doc.size());
  for (const auto& u : doc.units) unit_terms.push_back(count_terms(u.text));

  std::vector<double> sim;
  for (int64_t b = 0; b + 1 < n; ++b) {
    TermCounts left, right;
    for (int64_t i = std::max<int64_t>(0, b - window_ + 1); i <= b; ++i)
      for (const auto& [t, c] : unit_terms[static_cast<size_t>(i)]) left[t] += c;
    for (int64_t i = b + 1; i <= std::min<int64_t>(n - 1, b + window_); ++i)
      for (const auto& [t, c] : unit_terms[static_cast<size_t>(i)]) right[t] += c;
    sim.push_back(cosine(left, right));
  }
  return sim;
}

std::vector<double> LexicalScorer::do_seg_prob(const Document& doc) {
  const auto sim = similarities(doc);
  const size_t m = sim.size();
  std::vector<double> depth(m);
  for (size_t i = 0; i < m; ++i) {
    size_t l = i;
    while (l > 0 && sim[l - 1] >= sim[l]) --l;
    size_t r = i;
    while (r + 1 < m && sim[r + 1] >= sim[r]) ++r;
    depth[i] = (sim[l] - sim[i]) + (sim[r] - sim[i]);
  }
  if (m == 0) return depth;
  const auto [lo, hi] = std::minmax_element(depth.begin(), depth.end());
  const double low = *lo, range = *hi - *lo;
  for (auto& d : depth) d = range > 1e-12 ? (d - low) / range : 0.0;
  return depth;
}

double LexicalScorer::do_coherence(const Document& doc, std::optional<UnitSpan>, UnitSpan stack_top, UnitSpan) {
  return 1.0 - do_seg_prob(doc)[static_cast<size_t>(stack_top.last)];
}

// ---------------------------------------------------------------------------
// SegPointerAdapter

SegPointerAdapter::SegPointerAdapter(std::unique_ptr<Scorer> inner) : inner_(std::move(inner)) {
  if (!inner_ || !inner_->capabilities().has(Capability::segmentation))
    fail(ErrorKind::config, "derived pointer scores need a segmentation scorer");
}

Capabilities SegPointerAdapter::capabilities() const {
  auto caps = inner_->capabilities();
  return caps.add(Capability::pointer);
}

std::vector<double> SegPointerAdapter::do_seg_prob(const Document& doc) { return cached_seg(doc); }

double SegPointerAdapter::do_coherence(const Document& doc, std::optional<UnitSpan> second, UnitSpan top,
                                       UnitSpan front) {
  return inner_->coherence(doc, second, top, front);
}

ActionDistribution SegPointerAdapter::do_pointer(const Document& doc, const DecoderState& state) {
  const auto seg = cached_seg(doc);
  ActionDistribution d;
  for (auto b : state.unassigned) {
    const double p = seg[static_cast<size_t>(b)];
    d.split.emplace(b, p);
    d.combine.emplace(b, 1.0 - p);
  }
  return d;
}

std::vector<double> SegPointerAdapter::cached_seg(const Document& doc) {
  std::lock_guard lock(mutex_);
  if (cached_id_ != doc.id || cached_.size() != doc.boundary_count() || cached_id_.empty()) {
    cached_ = inner_->seg_scores(doc).seg_prob;
    cached_id_ = doc.id;
  }
  return cached_;
}

// ---------------------------------------------------------------------------
// Spec parsing

namespace {

// Forwards to a scorer owned elsewhere; lets workers share one instance.
class SharedScorer final : public Scorer {
 public:
  explicit SharedScorer(std::shared_ptr<Scorer> inner) : inner_(std::move(inner)) {}

  Capabilities capabilities() const override { return inner_->capabilities(); }
  bool shareable() const override { return true; }
  std::string describe() const override { return inner_->describe(); }

 protected:
  std::vector<double> do_seg_prob(const Document& doc) override { return inner_->seg_scores(doc).seg_prob; }
  double do_coherence(const Document& doc, std::optional<UnitSpan> second, UnitSpan top, UnitSpan front) override {
    return inner_->coherence(doc, second, top, front);
  }
  ActionDistribution do_pointer(const Document& doc, const DecoderState& state) override {
    return inner_->pointer_scores(doc, state);
  }

 private:
  std::shared_ptr<Scorer> inner_;
};

double parse_probability(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    fail(ErrorKind::config, "bad number '" + std::string(text) + "' in scorer spec");
  return value;
}

std::string replace_fold(std::string_view spec, int fold) {
  std::string out(spec);
  const std::string token = "{fold}";
  for (size_t pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos))
    out.replace(pos, token.size(), std::to_string(fold));
  return out;
}

}  // namespace

std::unique_ptr<Scorer> make_scorer(std::string_view spec) {
  auto rest = [&](std::string_view prefix) { return spec.substr(prefix.size()); };
  if (spec.starts_with("file:")) {
    if (rest("file:").empty()) fail(ErrorKind::config, "scorer spec 'file:' needs a path");
    return std::make_unique<FileScorer>(std::string(rest("file:")));
  }
  if (spec == "lexical") return std::make_unique<LexicalScorer>();
  if (spec.starts_with("lexical:")) {
    const double w = parse_probability(rest("lexical:"));
    if (w != std::floor(w)) fail(ErrorKind::config, "lexical window must be an integer");
    return std::make_unique<LexicalScorer>(static_cast<int>(w));
  }
  if (spec.starts_with("const:")) return std::make_unique<ConstantScorer>(parse_probability(rest("const:")));
  if (spec.starts_with("extern:")) {
    if (rest("extern:").empty()) fail(ErrorKind::config, "scorer spec 'extern:' needs a command");
    return std::make_unique<ExternalScorer>(std::string(rest("extern:")));
  }
  if (spec.starts_with("derived:")) return std::make_unique<SegPointerAdapter>(make_scorer(rest("derived:")));
  fail(ErrorKind::config, "unknown scorer spec '" + std::string(spec) +
                              "' (expected file:PATH, lexical[:W], const:P, extern:CMD or derived:SPEC)");
}

ScorerFactory scorer_factory(std::string_view spec) {
  auto first = make_scorer(spec);
  if (first->shareable()) {
    std::shared_ptr<Scorer> shared = std::move(first);
    return [shared]() -> std::unique_ptr<Scorer> { return std::make_unique<SharedScorer>(shared); };
  }

  struct State {
    std::mutex mutex;
    std::unique_ptr<Scorer> first;
    std::string spec;
  };
  auto state = std::make_shared<State>();
  state->first = std::move(first);
  state->spec = std::string(spec);
  // The validated instance goes to the first caller; later callers get fresh ones.
  return [state]() -> std::unique_ptr<Scorer> {
    std::lock_guard lock(state->mutex);
    if (state->first) return std::move(state->first);
    return make_scorer(state->spec);
  };
}

FoldScorerFactory fold_scorer_factory(std::string_view spec) {
  std::string pattern(spec);
  // Fold 0 is built eagerly so bad specs surface before any work starts.
  make_scorer(replace_fold(pattern, 0));
  return [pattern](int fold) { return make_scorer(replace_fold(pattern, fold)); };
}

}  // namespace macrodt
