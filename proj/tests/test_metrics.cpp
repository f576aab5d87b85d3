#include <doctest.h>

#include <nlohmann/json.hpp>
#include <set>

#include "oracles.hpp"
#include "useembed/metrics.hpp"

using namespace useembed;

namespace {

// Ranker with a fixed answer for every instance.
Ranker fixed_ranker(std::vector<NodeId> order) {
  return [order](const Eigen::VectorXd&) { return order; };
}

// One fixed prediction per instance keyed by the first feature value.
Ranker keyed_ranker(std::map<int, std::vector<NodeId>> table) {
  return [table](const Eigen::VectorXd& x) { return table.at(static_cast<int>(x[0])); };
}

Dataset instances_of(const Taxonomy& tax, const AttributeTable& attrs,
                     const std::vector<NodeId>& ys) {
  Dataset d;
  d.taxonomy = tax;
  d.attributes = attrs;
  d.X.resize(ys.size(), 1);
  for (std::size_t i = 0; i < ys.size(); ++i) d.X(i, 0) = static_cast<double>(i);
  d.y.resize(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) d.y[i] = ys[i];
  return d;
}

// Independent re-implementation of hierarchical precision, built on std::set.
double hp_oracle(const Ranker& ranker, const Dataset& data, int k) {
  k = std::min(k, data.taxonomy.num_leaves());
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const auto ranked = ranker(data.X.row(i).transpose());
    std::set<NodeId> topk(ranked.begin(), ranked.begin() + k);

    std::vector<NodeId> levels{data.y[i]};
    for (NodeId a : data.taxonomy.ancestors(data.y[i]))
      if (data.taxonomy.parent(a) != kNoNode) levels.push_back(a);

    double acc = 0.0;
    for (NodeId lvl : levels) {
      std::set<NodeId> correct;
      for (NodeId leaf = 1; leaf <= data.taxonomy.num_leaves(); ++leaf) {
        NodeId walk = leaf;
        while (walk != kNoNode) {
          if (walk == lvl) correct.insert(leaf);
          walk = data.taxonomy.parent(walk);
        }
      }
      int inter = 0;
      for (NodeId t : topk)
        if (correct.count(t)) ++inter;
      acc += static_cast<double>(inter) / std::min<std::size_t>(k, correct.size());
    }
    total += acc / levels.size();
  }
  return total / data.n();
}

}  // namespace

TEST_CASE("flat hit basics") {
  Rng rng(83);
  const Taxonomy tax = oracles::two_level_taxonomy();
  const AttributeTable attrs = oracles::random_attributes(tax, 2, rng);
  const Dataset data = instances_of(tax, attrs, {1, 2, 3, 4});

  // a ranker that always answers [1,2,3,4]
  const Ranker r = fixed_ranker({1, 2, 3, 4});
  CHECK(flat_hit_at_k(r, data, 1) == doctest::Approx(0.25));
  CHECK(flat_hit_at_k(r, data, 4) == doctest::Approx(1.0));  // k = C holds the truth

  std::vector<std::string> warnings;
  CHECK(flat_hit_at_k(r, data, 9, &warnings) == doctest::Approx(1.0));  // clamped
  CHECK(warnings.size() == 1);
}

TEST_CASE("a perfect-margin model scores 1.0 at k = 1") {
  Rng rng(89);
  const Taxonomy tax = oracles::tiny_taxonomy();
  const AttributeTable attrs = oracles::random_attributes(tax, 2, rng);

  EmbeddingModel m;
  m.taxonomy = tax;
  m.attribute_names = attrs.names();
  m.hyper.d_e = 2;
  m.W = Eigen::MatrixXd::Identity(2, 2);
  m.U_cat.resize(2, 2);
  m.U_cat << 1, 0, 0, 1;
  m.U_sup = Eigen::MatrixXd::Zero(2, 1);
  m.U_attr = Eigen::MatrixXd::Zero(2, 2);
  m.B = Eigen::MatrixXd::Zero(2, 3);

  Dataset data;
  data.taxonomy = tax;
  data.attributes = attrs;
  data.X.resize(4, 2);
  data.X << 1, 0, 0.9, 0.2, 0, 1, 0.1, 0.8;
  data.y.resize(4);
  data.y << 1, 1, 2, 2;

  CHECK(flat_hit_at_k(m, data, 1) == doctest::Approx(1.0));
  CHECK(hierarchical_precision_at_k(m, data, 1) == doctest::Approx(1.0));
}

TEST_CASE("flat hit equals a hand count on a 3-class fixture") {
  Rng rng(97);
  const Taxonomy tax = gen_taxonomy(3, 1, 0);
  const AttributeTable attrs = oracles::random_attributes(tax, 2, rng);
  const Dataset data = instances_of(tax, attrs, {1, 2, 3, 1, 2, 3});

  const Ranker r = keyed_ranker({{0, {1, 2, 3}},    // hit@1
                                 {1, {3, 2, 1}},    // hit@2
                                 {2, {3, 1, 2}},    // hit@1
                                 {3, {2, 3, 1}},    // hit@3
                                 {4, {1, 2, 3}},    // hit@2
                                 {5, {2, 1, 3}}});  // hit@3

  // hand count: hits at k=1: 2/6, k=2: 4/6, k=3: 6/6
  CHECK(flat_hit_at_k(r, data, 1) == doctest::Approx(2.0 / 6));
  CHECK(flat_hit_at_k(r, data, 2) == doctest::Approx(4.0 / 6));
  CHECK(flat_hit_at_k(r, data, 3) == doctest::Approx(1.0));
}

TEST_CASE("hierarchical precision: wrong leaf under the right parent at k=1 is 0.5") {
  Rng rng(199);
  const Taxonomy tax = oracles::two_level_taxonomy();  // leaves 1,2 under 5; 3,4 under 6
  const AttributeTable attrs = oracles::random_attributes(tax, 2, rng);
  const Dataset data = instances_of(tax, attrs, {1});

  // predicts sibling leaf 2 first: leaf level 0, parent level 1
  const Ranker r = fixed_ranker({2, 1, 3, 4});
  CHECK(hierarchical_precision_at_k(r, data, 1) == doctest::Approx(0.5));
}

TEST_CASE("hierarchical precision matches the independent oracle on random fixtures") {
  Rng rng(211);
  const Taxonomy tax = oracles::two_level_taxonomy();
  const AttributeTable attrs = oracles::random_attributes(tax, 2, rng);

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<NodeId> ys;
    for (int i = 0; i < 12; ++i)
      ys.push_back(static_cast<NodeId>(rng.uniform_int(1, tax.num_leaves())));
    const Dataset data = instances_of(tax, attrs, ys);

    std::map<int, std::vector<NodeId>> table;
    for (int i = 0; i < data.n(); ++i) {
      std::vector<NodeId> perm{1, 2, 3, 4};
      rng.shuffle(perm);
      table[i] = perm;
    }
    const Ranker r = keyed_ranker(table);

    for (int k = 1; k <= 4; ++k) {
      CHECK(hierarchical_precision_at_k(r, data, k) ==
            doctest::Approx(hp_oracle(r, data, k)).epsilon(1e-12));
      CHECK(flat_hit_at_k(r, data, k) <= flat_hit_at_k(r, data, std::min(4, k + 1)) + 1e-12);
    }

    // superset credit: every non-root ancestor set strictly contains the leaf
    for (int k = 1; k <= 4; ++k)
      CHECK(hierarchical_precision_at_k(r, data, k) >= flat_hit_at_k(r, data, k) - 1e-12);
  }
}

TEST_CASE("leaves-only taxonomies reduce to flat precision") {
  Rng rng(223);
  Taxonomy flat_tax({"a", "b", "c"}, {}, {0, 0, 0});
  Eigen::MatrixXi labels = Eigen::MatrixXi::Zero(3, 1);
  AttributeTable attrs({"x"}, labels);
  const Dataset data = instances_of(flat_tax, attrs, {1, 2, 3, 2});

  const Ranker r = fixed_ranker({2, 1, 3});
  CHECK(hierarchical_precision_at_k(r, data, 1) == doctest::Approx(flat_hit_at_k(r, data, 1)));
}

TEST_CASE("metrics are invariant under instance permutation") {
  Rng rng(227);
  const Taxonomy tax = oracles::two_level_taxonomy();
  const AttributeTable attrs = oracles::random_attributes(tax, 2, rng);
  const EmbeddingModel m = oracles::random_model(tax, attrs, Hyperparams{}, rng, {});
  Dataset data = oracles::random_dataset(tax, attrs, rng, {});

  const double before_flat = flat_hit_at_k(m, data, 2);
  const double before_hp = hierarchical_precision_at_k(m, data, 2);

  std::vector<int> perm(data.n());
  for (int i = 0; i < data.n(); ++i) perm[i] = i;
  rng.shuffle(perm);
  const Dataset shuffled = subset(data, perm);

  CHECK(flat_hit_at_k(m, shuffled, 2) == doctest::Approx(before_flat).epsilon(1e-12));
  CHECK(hierarchical_precision_at_k(m, shuffled, 2) == doctest::Approx(before_hp).epsilon(1e-12));
}

TEST_CASE("evaluate fills a coherent report and serializes") {
  Rng rng(229);
  const Taxonomy tax = oracles::two_level_taxonomy();
  const AttributeTable attrs = oracles::random_attributes(tax, 2, rng);
  const EmbeddingModel m = oracles::random_model(tax, attrs, Hyperparams{}, rng, {});
  oracles::FixtureOptions opt;
  opt.n = 20;
  const Dataset data = oracles::random_dataset(tax, attrs, rng, opt);

  const EvalReport report = evaluate(make_ranker(m), data, {1, 2, 5}, {2, 5});
  CHECK(report.n_test == 20);
  REQUIRE(report.flat_hit.size() == 3);
  REQUIRE(report.hier_precision.size() == 2);
  CHECK(report.flat_hit[0].second <= report.flat_hit[1].second);
  for (auto& [k, v] : report.flat_hit) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (auto& [k, v] : report.hier_precision) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(report.per_class.size() == 4);
  CHECK(!report.warnings.empty());  // k=5 > C=4 clamped

  const auto parsed = nlohmann::json::parse(report.to_json());
  CHECK(parsed["n_test"] == 20);
  CHECK(parsed["flat_hit"].contains("1"));
  CHECK(parsed["hierarchical_precision"].contains("5"));
  CHECK(!report.to_text().empty());
}
