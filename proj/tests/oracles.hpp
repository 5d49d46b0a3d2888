#pragma once

// Brute-force reference computations for the tests. Nothing here calls into
// the library: trees are plain nested structs built by exhaustive
// enumeration and rendered to the text form independently.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Node {
  int lo = 0;
  int hi = 0;  // inclusive unit range
  std::shared_ptr<const Node> left, right;

  bool leaf() const { return !left; }
  int split() const { return left->hi; }  // boundary between left and right
};
using NodePtr = std::shared_ptr<const Node>;

/// Every binary tree over units [lo, hi].
inline std::vector<NodePtr> all_trees(int lo, int hi) {
  static std::map<std::pair<int, int>, std::vector<NodePtr>> memo;
  auto key = std::make_pair(lo, hi);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::vector<NodePtr> out;
  if (lo == hi) {
    out.push_back(std::make_shared<Node>(Node{lo, hi, nullptr, nullptr}));
  } else {
    for (int s = lo; s < hi; ++s)
      for (const auto& l : all_trees(lo, s))
        for (const auto& r : all_trees(s + 1, hi)) out.push_back(std::make_shared<Node>(Node{lo, hi, l, r}));
  }
  memo[key] = out;
  return out;
}

inline std::string text(const Node& n) {
  if (n.leaf()) return std::to_string(n.lo);
  return "(" + text(*n.left) + " " + text(*n.right) + ")";
}

inline std::string shape(const Node& n) {
  if (n.leaf()) return "*";
  return "(" + shape(*n.left) + shape(*n.right) + ")";
}

/// Internal-node spans.
inline void spans(const Node& n, std::set<std::pair<int, int>>& out) {
  if (n.leaf()) return;
  out.insert({n.lo, n.hi});
  spans(*n.left, out);
  spans(*n.right, out);
}

/// True when every internal node splits at the highest-ranked boundary in
/// its span, i.e. the tree is what top-down splitting by `ranks` produces.
inline bool consistent(const Node& n, const std::vector<int64_t>& ranks) {
  if (n.leaf()) return true;
  for (int b = n.lo; b < n.hi; ++b)
    if (b != n.split() && ranks[static_cast<size_t>(b)] > ranks[static_cast<size_t>(n.split())]) return false;
  return consistent(*n.left, ranks) && consistent(*n.right, ranks);
}

/// The unique enumerated tree consistent with `ranks` (checked unique).
inline NodePtr tree_for_ranks(int n, const std::vector<int64_t>& ranks) {
  NodePtr found;
  int matches = 0;
  for (const auto& t : all_trees(0, n - 1))
    if (consistent(*t, ranks)) {
      found = t;
      ++matches;
    }
  return matches == 1 ? found : nullptr;
}

/// Direct simulation of bottom-up merging: repeatedly merge the adjacent
/// pair separated by the lowest remaining rank.
inline std::string merge_simulation(int n, const std::vector<int64_t>& ranks) {
  struct Seg {
    int lo, hi;
    std::string text;
  };
  std::vector<Seg> segs;
  for (int i = 0; i < n; ++i) segs.push_back({i, i, std::to_string(i)});
  while (segs.size() > 1) {
    size_t best = 0;
    for (size_t i = 0; i + 1 < segs.size(); ++i)
      if (ranks[static_cast<size_t>(segs[i].hi)] < ranks[static_cast<size_t>(segs[best].hi)]) best = i;
    Seg merged{segs[best].lo, segs[best + 1].hi, "(" + segs[best].text + " " + segs[best + 1].text + ")"};
    segs.erase(segs.begin() + static_cast<long>(best), segs.begin() + static_cast<long>(best) + 2);
    segs.insert(segs.begin() + static_cast<long>(best), merged);
  }
  return segs.front().text;
}

inline uint64_t catalan(int k) {
  uint64_t c = 1;
  for (int i = 0; i < k; ++i) c = c * 2 * (2 * static_cast<uint64_t>(i) + 1) / (static_cast<uint64_t>(i) + 2);
  return c;
}

/// All permutations of 0..m-1 as rank vectors.
inline std::vector<std::vector<int64_t>> all_rankings(int m) {
  std::vector<int64_t> p(static_cast<size_t>(m));
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int64_t>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline std::vector<int64_t> random_ranking(int m, std::mt19937_64& rng) {
  std::vector<int64_t> p(static_cast<size_t>(m));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

/// Span accuracy by plain set intersection on the text forms' spans.
inline std::pair<size_t, size_t> span_match(const Node& pred, const Node& gold) {
  std::set<std::pair<int, int>> p, g;
  spans(pred, p);
  spans(gold, g);
  size_t m = 0;
  for (const auto& s : g) m += p.count(s);
  return {m, g.size()};
}

}  // namespace oracle
