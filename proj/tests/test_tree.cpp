#include <doctest.h>

#include <random>
#include <set>

#include "macrodt/error.hpp"
#include "macrodt/ranking.hpp"
#include "macrodt/tree.hpp"
#include "oracles.hpp"

using namespace macrodt;

namespace {

DiscourseTree from_ranks(size_t n, std::vector<int64_t> r, Direction d = Direction::top_down) {
  return tree_from_ranks(n, BoundaryRanking(std::move(r)), d);
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("parse and print") {
  auto t = DiscourseTree::parse("((0 1) ((2 3) 4))");
  CHECK(t.to_string() == "((0 1) ((2 3) 4))");
  CHECK(t.leaf_count() == 5);
  CHECK(t.internal_count() == 4);
  CHECK(t.leaves() == std::vector<int32_t>{0, 1, 2, 3, 4});
  CHECK(t.root().span == UnitSpan{0, 4});
  CHECK(t.split_boundary(t.root_id()) == 1);

  CHECK(DiscourseTree::parse("  ( 0   1 ) ").to_string() == "(0 1)");
  CHECK(DiscourseTree::parse("7").to_string() == "7");

  CHECK(kind_of([] { DiscourseTree::parse("(0 1 2)"); }) == ErrorKind::structural);
  CHECK(kind_of([] { DiscourseTree::parse("((0) 1)"); }) == ErrorKind::structural);
  CHECK(kind_of([] { DiscourseTree::parse("(0 1"); }) == ErrorKind::structural);
  CHECK(kind_of([] { DiscourseTree::parse("(0 1))"); }) == ErrorKind::structural);
  CHECK(kind_of([] { DiscourseTree::parse(""); }) == ErrorKind::structural);
  CHECK(kind_of([] { DiscourseTree::parse("(a b)"); }) == ErrorKind::structural);
}

TEST_CASE("builder lays nodes out in post-order") {
  TreeBuilder b;
  auto l2 = b.add_leaf(2);
  auto l0 = b.add_leaf(0);
  auto l1 = b.add_leaf(1);
  auto inner = b.add_internal(l0, l1);
  auto root = b.add_internal(inner, l2);
  auto t = std::move(b).finish(root);
  CHECK(t.to_string() == "((0 1) 2)");
  CHECK(t == DiscourseTree::parse("((0 1) 2)"));
  for (DiscourseTree::NodeId id = 0; id < t.root_id(); ++id) {
    const auto& n = t.node(id);
    if (!n.is_leaf()) CHECK((n.left < id && n.right < id));
  }
}

TEST_CASE("validate") {
  CHECK(validate(DiscourseTree::parse("((0 1) 2)"), 3).empty());
  CHECK_FALSE(validate(DiscourseTree::parse("(0 2)"), 3).empty());
  CHECK_FALSE(validate(DiscourseTree::parse("(0 2)"), 2).empty());
  CHECK_FALSE(validate(DiscourseTree::parse("((0 1) 2)"), 4).empty());
  CHECK_FALSE(validate(DiscourseTree::parse("(1 0)"), 2).empty());
  CHECK_FALSE(validate(DiscourseTree(), 1).empty());
  CHECK(validate(DiscourseTree::single_leaf(0), 1).empty());
}

TEST_CASE("tree_from_ranks on the worked five-unit example") {
  auto ranking = BoundaryRanking::from_scores(std::vector<double>{0.2, 0.7, 0.4, 0.5});
  CHECK(ranking.descending() == std::vector<int32_t>{1, 3, 2, 0});
  auto td = tree_from_ranks(5, ranking, Direction::top_down);
  auto bu = tree_from_ranks(5, ranking, Direction::bottom_up);
  CHECK(td.to_string() == "((0 1) ((2 3) 4))");
  CHECK(bu == td);

  // Independent check: among all 14 five-leaf trees exactly one is
  // consistent with this ranking, and it is the same one.
  REQUIRE(oracle::all_trees(0, 4).size() == 14);
  auto unique = oracle::tree_for_ranks(5, {ranking.ranks().begin(), ranking.ranks().end()});
  REQUIRE(unique);
  CHECK(oracle::text(*unique) == td.to_string());
  CHECK(oracle::merge_simulation(5, {ranking.ranks().begin(), ranking.ranks().end()}) == td.to_string());
}

TEST_CASE("tree_from_ranks small cases") {
  CHECK(from_ranks(1, {}).to_string() == "0");
  CHECK(from_ranks(2, {1}).to_string() == "(0 1)");
  CHECK(from_ranks(3, {0, 1}).to_string() == "((0 1) 2)");
  CHECK(from_ranks(3, {1, 0}).to_string() == "(0 (1 2))");
  // Arbitrary distinct values act through their order only.
  CHECK(from_ranks(4, {-5, 100, 7}) == from_ranks(4, {0, 2, 1}));
}

TEST_CASE("tree_from_ranks errors") {
  CHECK(kind_of([] { from_ranks(3, {1}); }) == ErrorKind::structural);
  CHECK(kind_of([] { from_ranks(0, {}); }) == ErrorKind::structural);
  CHECK(kind_of([] { BoundaryRanking({1, 1}); }) == ErrorKind::structural);
  std::vector<int32_t> bad{0, 0};
  CHECK(kind_of([&] { BoundaryRanking::from_order(bad); }) == ErrorKind::structural);
}

TEST_CASE("tie rule: equal scores split the lower boundary first") {
  auto r = BoundaryRanking::from_scores(std::vector<double>{0.5, 0.5, 0.5});
  CHECK(r.descending() == std::vector<int32_t>{0, 1, 2});
  CHECK(tree_from_ranks(4, r).to_string() == "(0 (1 (2 3)))");
  CHECK(tree_from_ranks(4, r, Direction::bottom_up).to_string() == "(0 (1 (2 3)))");
}

TEST_CASE("duality and oracle agreement, exhaustive up to six units") {
  for (int n = 1; n <= 6; ++n)
    for (const auto& r : oracle::all_rankings(n - 1)) {
      auto td = from_ranks(static_cast<size_t>(n), r, Direction::top_down);
      auto bu = from_ranks(static_cast<size_t>(n), r, Direction::bottom_up);
      REQUIRE(td == bu);
      auto expect = oracle::tree_for_ranks(n, r);
      REQUIRE(expect);
      REQUIRE(td.to_string() == oracle::text(*expect));
      REQUIRE(oracle::merge_simulation(n, r) == bu.to_string());
      REQUIRE(validate(td, static_cast<size_t>(n)).empty());
    }
}

TEST_CASE("duality on random rankings, seven to ten units") {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 400; ++i) {
    const int n = 7 + i % 4;
    auto r = oracle::random_ranking(n - 1, rng);
    auto td = from_ranks(static_cast<size_t>(n), r, Direction::top_down);
    REQUIRE(td == from_ranks(static_cast<size_t>(n), r, Direction::bottom_up));
    REQUIRE(td.to_string() == oracle::merge_simulation(n, r));
  }
}

TEST_CASE("ranks_from_tree inverts tree_from_ranks") {
  auto left = ranks_from_tree(DiscourseTree::parse("((0 1) 2)"));
  CHECK(left.rank(1) > left.rank(0));
  auto right = ranks_from_tree(DiscourseTree::parse("(0 (1 2))"));
  CHECK(right.rank(0) > right.rank(1));

  for (int n = 1; n <= 7; ++n)
    for (const auto& t : oracle::all_trees(0, n - 1)) {
      auto tree = DiscourseTree::parse(oracle::text(*t));
      auto r = ranks_from_tree(tree);
      REQUIRE(r.size() == static_cast<size_t>(n - 1));
      REQUIRE(tree_from_ranks(static_cast<size_t>(n), r) == tree);
      // Ranks are a permutation of 0..n-2.
      std::set<int64_t> seen(r.ranks().begin(), r.ranks().end());
      REQUIRE(seen.size() == static_cast<size_t>(n - 1));
      if (n > 1) REQUIRE((*seen.begin() == 0 && *seen.rbegin() == n - 2));
    }
}

TEST_CASE("shape signatures") {
  CHECK(shape_signature(DiscourseTree::parse("(0 1)")) == "(··)");
  CHECK(shape_signature(DiscourseTree::single_leaf(3)) == "·");
  CHECK(shape_signature(DiscourseTree::parse("((0 1) 2)")) != shape_signature(DiscourseTree::parse("(0 (1 2))")));

  for (int n = 1; n <= 8; ++n) {
    std::set<std::string> sigs;
    for (const auto& r : oracle::all_rankings(n - 1)) sigs.insert(shape_signature(from_ranks(static_cast<size_t>(n), r)));
    CHECK(sigs.size() == oracle::catalan(n - 1));
  }
  const std::vector<uint64_t> expected{1, 1, 2, 5, 14, 42, 132, 429};
  for (int k = 0; k < 8; ++k) CHECK(oracle::catalan(k) == expected[static_cast<size_t>(k)]);
}

TEST_CASE("signature equality matches oracle shape equality") {
  const auto trees = oracle::all_trees(0, 4);
  for (const auto& a : trees)
    for (const auto& b : trees) {
      bool same = oracle::shape(*a) == oracle::shape(*b);
      auto sa = shape_signature(DiscourseTree::parse(oracle::text(*a)));
      auto sb = shape_signature(DiscourseTree::parse(oracle::text(*b)));
      REQUIRE((sa == sb) == same);
    }
}
