#include <doctest.h>

#include "oracles.hpp"
#include "useembed/errors.hpp"
#include "useembed/taxonomy.hpp"

using namespace useembed;

TEST_CASE("ancestors walks the parent chain, excluding the node") {
  // leaf 1 -> super 3 -> super 4 (root); leaf 2 under 3 as well
  Taxonomy tax({"a", "b"}, {"mid", "top"}, {3, 3, 4, 0});
  CHECK(tax.ancestors(1) == std::vector<NodeId>{3, 4});
  CHECK(tax.ancestors(4).empty());
  CHECK_THROWS_AS(tax.ancestors(99), ValidationError);
}

TEST_CASE("siblings share a parent and exclude the node itself") {
  Taxonomy tax = oracles::tiny_taxonomy();
  CHECK(tax.siblings(1) == std::vector<NodeId>{2});
  CHECK(tax.siblings(3).empty());  // root

  Taxonomy only_child({"solo"}, {"root"}, {2, 0});
  CHECK(only_child.siblings(1).empty());
  CHECK_THROWS_AS(only_child.siblings(42), ValidationError);
}

TEST_CASE("children/parent/siblings are mutually consistent") {
  Taxonomy tax = oracles::two_level_taxonomy();
  for (NodeId p = 1; p <= tax.num_nodes(); ++p) {
    for (NodeId c : tax.children(p)) CHECK(tax.parent(c) == p);
    for (NodeId x = 1; x <= tax.num_nodes(); ++x) {
      const bool is_child = std::find(tax.children(p).begin(), tax.children(p).end(), x) !=
                            tax.children(p).end();
      CHECK(is_child == (tax.parent(x) == p));
    }
  }
  for (NodeId c = 1; c <= tax.num_nodes(); ++c) {
    for (NodeId s : tax.siblings(c)) {
      CHECK(s != c);
      CHECK(tax.parent(s) == tax.parent(c));
    }
  }
}

TEST_CASE("construction rejects malformed forests") {
  // cycle: 3 -> 4 -> 3
  CHECK_THROWS_AS(Taxonomy({"a", "b"}, {"s1", "s2"}, {3, 4, 4, 3}), ValidationError);
  // leaf used as parent
  CHECK_THROWS_AS(Taxonomy({"a", "b"}, {"s"}, {2, 3, 0}), ValidationError);
  // duplicate name
  CHECK_THROWS_AS(Taxonomy({"a", "a"}, {"s"}, {3, 3, 0}), ValidationError);
  // parent out of range
  CHECK_THROWS_AS(Taxonomy({"a"}, {"s"}, {9, 0}), ValidationError);
}

TEST_CASE("forests with several roots are allowed") {
  Taxonomy tax({"a", "b", "c"}, {"r1", "r2"}, {4, 4, 5, 0, 0});
  CHECK(tax.roots() == std::vector<NodeId>{4, 5});
  CHECK(tax.leaves_under(4) == std::vector<NodeId>{1, 2});
  CHECK(tax.leaves_under(5) == std::vector<NodeId>{3});
  CHECK(tax.siblings(4).empty());
}

TEST_CASE("leaves_under collects every descendant leaf") {
  Taxonomy tax = oracles::two_level_taxonomy();
  CHECK(tax.leaves_under(5) == std::vector<NodeId>{1, 2});
  CHECK(tax.leaves_under(7) == std::vector<NodeId>{1, 2, 3, 4});
  CHECK(tax.leaves_under(2) == std::vector<NodeId>{2});
}
