#include <doctest.h>

#include "oracles.hpp"
#include "useembed/errors.hpp"
#include "useembed/objective.hpp"

using namespace useembed;

TEST_CASE("loss_category hinge semantics") {
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd U_cat(2, 2);
  U_cat << 1, 0, 0, 1;

  Eigen::VectorXd x(2);
  x << 1, 0;  // on top of u_1
  CHECK(loss_category(W, U_cat, x, 1) == 0.0);

  x << 0, 0;  // equidistant: [1 + 1 - 1]_+ = 1
  CHECK(loss_category(W, U_cat, x, 1) == doctest::Approx(1.0));

  Eigen::VectorXd bad(3);
  CHECK_THROWS_AS(loss_category(W, U_cat, bad, 1), ValidationError);
  CHECK_THROWS_AS(loss_category(W, U_cat, x, 7), ValidationError);
}

TEST_CASE("loss_category equals the naive per-class loop") {
  Rng rng(101);
  const Taxonomy tax = gen_taxonomy(4, 1, 0);
  const AttributeTable attrs = oracles::random_attributes(tax, 2, rng);
  for (int t = 0; t < 10; ++t) {
    const EmbeddingModel m = oracles::random_model(tax, attrs, Hyperparams{}, rng, {});
    const Eigen::VectorXd x = rng.normal_vector(m.dim());
    for (NodeId y = 1; y <= 4; ++y)
      CHECK(loss_category(m.W, m.U_cat, x, y) ==
            doctest::Approx(oracles::loss_category(m, x, y)).epsilon(1e-12));
  }
}

TEST_CASE("loss_super margin over ancestors and their siblings") {
  // leaves 1,2 under supers 3,4 respectively; both supers under root 5
  Taxonomy tax({"a", "b"}, {"s1", "s2", "root"}, {3, 4, 5, 5, 0});
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd U_cat = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd U_sup(2, 3);

  Eigen::VectorXd x(2);
  x << 0, 0;
  // d(s1) = 0 and d(s2) = 2: hinge [1 + 0 - 2]_+ = 0
  U_sup.col(0) << 0, 0;
  U_sup.col(1) << 1, 1;
  U_sup.col(2) << 5, 5;
  CHECK(loss_super(W, U_sup, U_cat, tax, x, 1) == 0.0);

  // d(s2) = 1: hinge [1 + 0 - 1]_+ = 0 still, then shrink to activate
  U_sup.col(1) << 1, 0;
  CHECK(loss_super(W, U_sup, U_cat, tax, x, 1) == 0.0);
  U_sup.col(1) << 0.5, 0;
  CHECK(loss_super(W, U_sup, U_cat, tax, x, 1) == doctest::Approx(0.75));

  SUBCASE("ancestor with no siblings contributes nothing") {
    Taxonomy chain({"only"}, {"s", "root"}, {2, 3, 0});
    Eigen::MatrixXd Uc = Eigen::MatrixXd::Zero(2, 1);
    Eigen::MatrixXd Us = Eigen::MatrixXd::Ones(2, 2);
    CHECK(loss_super(W, Us, Uc, chain, x, 1) == 0.0);
  }
}

TEST_CASE("loss_super mixes leaf and super siblings from the right blocks") {
  // leaf 1 under s1; leaf 2 directly under root; s1's sibling is leaf 2
  Taxonomy tax({"a", "b"}, {"s1", "root"}, {3, 4, 4, 0});
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd U_cat(2, 2), U_sup(2, 2);
  U_cat.col(0) << 0, 0;
  U_cat.col(1) << 0.5, 0;  // the sibling leaf, close enough to activate
  U_sup.col(0) << 0, 0;
  U_sup.col(1) << 9, 9;

  Eigen::VectorXd x(2);
  x << 0, 0;
  // ancestors(1) = {s1, root}; siblings(s1) = {leaf 2}: [1 + 0 - 0.25]_+
  CHECK(loss_super(W, U_sup, U_cat, tax, x, 1) == doctest::Approx(0.75));
}

TEST_CASE("loss_super equals the double-loop oracle on random models") {
  Rng rng(103);
  const Taxonomy tax = oracles::two_level_taxonomy();
  const AttributeTable attrs = oracles::random_attributes(tax, 2, rng);
  for (int t = 0; t < 10; ++t) {
    const EmbeddingModel m = oracles::random_model(tax, attrs, Hyperparams{}, rng, {});
    const Eigen::VectorXd x = rng.normal_vector(m.dim());
    for (NodeId y = 1; y <= tax.num_leaves(); ++y)
      CHECK(loss_super(m.W, m.U_sup, m.U_cat, tax, x, y) ==
            doctest::Approx(oracles::loss_super(m, tax, x, y)).epsilon(1e-12));
  }
}

TEST_CASE("loss_attr correlation margin over present attributes") {
  Taxonomy tax = oracles::tiny_taxonomy();
  Eigen::MatrixXi labels(2, 1);
  labels << 1, 0;
  AttributeTable attrs({"striped"}, labels);

  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd U_attr(2, 1);
  U_attr << 1, 0;

  Eigen::VectorXd x(2);
  x << 1, 0;
  CHECK(loss_attr(W, U_attr, attrs, x, 1, 1.0) == 0.0);  // correlation 1 meets sigma

  x << 0, 1;
  CHECK(loss_attr(W, U_attr, attrs, x, 1, 1.0) == doctest::Approx(1.0));

  // class 2 has no attributes: empty sum
  CHECK(loss_attr(W, U_attr, attrs, x, 2, 1.0) == 0.0);
}

TEST_CASE("loss_attr equals the loop oracle over present attributes") {
  Rng rng(107);
  const Taxonomy tax = oracles::tiny_taxonomy();
  Eigen::MatrixXi labels(2, 5);
  labels << 1, 0, 1, 0, 1, 0, 1, 1, 0, 0;  // 3 present for class 1
  std::vector<std::string> names{"a1", "a2", "a3", "a4", "a5"};
  AttributeTable attrs(names, labels);

  oracles::FixtureOptions opt;
  opt.A = 5;
  for (int t = 0; t < 10; ++t) {
    const EmbeddingModel m = oracles::random_model(tax, attrs, Hyperparams{}, rng, opt);
    const Eigen::VectorXd x = rng.normal_vector(m.dim());
    for (NodeId y = 1; y <= 2; ++y)
      CHECK(loss_attr(m.W, m.U_attr, attrs, x, y, 1.0) ==
            doctest::Approx(oracles::loss_attr(m, attrs, x, y, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("reg_semantic: exact reconstruction leaves only the exclusive term") {
  // c (leaf 1) is the only child of root super 2
  Taxonomy tax({"c"}, {"root"}, {2, 0});
  Eigen::MatrixXd U_attr = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd U_sup(2, 1);
  U_sup << 0.3, -0.2;
  Eigen::MatrixXd U_cat = U_sup;
  U_cat(0, 0) += 1.0;  // u_c = u_p + u_a1 exactly
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 2);
  B(0, 0) = 1.0;  // beta_c = e_1

  CHECK(reg_semantic(U_cat, U_sup, U_attr, B, tax, 1.0) == doctest::Approx(1.0));
  CHECK(reg_semantic(U_cat, U_sup, U_attr, B, tax, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("reg_semantic equals the term-by-term oracle") {
  Rng rng(109);
  // 3 leaves + 1 super (plus root) exercises ancestor and sibling pairs
  Taxonomy tax({"a", "b", "c"}, {"s", "root"}, {4, 4, 5, 5, 0});
  const AttributeTable attrs = oracles::random_attributes(tax, 3, rng);
  for (int t = 0; t < 10; ++t) {
    const EmbeddingModel m = oracles::random_model(tax, attrs, Hyperparams{}, rng, {});
    const double got = reg_semantic(m.U_cat, m.U_sup, m.U_attr, m.B, tax, 0.7);
    CHECK(got == doctest::Approx(oracles::reg_semantic(m, tax, 0.7)).epsilon(1e-12));
  }
}

TEST_CASE("total_objective composes the audited terms") {
  Rng rng(113);
  const Taxonomy tax = oracles::two_level_taxonomy();
  const AttributeTable attrs = oracles::random_attributes(tax, 3, rng);
  Hyperparams hyper;
  hyper.mu1 = 0.7;
  hyper.mu2 = 1.3;
  hyper.gamma2 = 0.2;

  const EmbeddingModel m = oracles::random_model(tax, attrs, hyper, rng, {});
  const Dataset data = oracles::random_dataset(tax, attrs, rng, {});

  const LossBreakdown b = total_objective(m, data, hyper);
  CHECK(b.total == doctest::Approx(oracles::total(m, data, hyper)).epsilon(1e-12));
  CHECK(b.total == b.l_c + hyper.mu1 * (b.l_s + b.l_a) + hyper.mu2 * b.reg + b.frob_penalty);
  CHECK(b.l_c >= 0.0);
  CHECK(b.l_s >= 0.0);
  CHECK(b.l_a >= 0.0);
  CHECK(b.reg >= 0.0);
  CHECK(b.frob_penalty == 0.0);

  SUBCASE("mu1 = mu2 = 0 reduces to the category loss") {
    Hyperparams lme = hyper;
    lme.mu1 = 0.0;
    lme.mu2 = 0.0;
    const LossBreakdown r = total_objective(m, data, lme);
    CHECK(r.total == r.l_c);
    CHECK(r.l_c == b.l_c);
  }
}

TEST_CASE("a well-separated construction reaches exactly zero objective") {
  // Two far-apart classes, exact reconstructions, instances on their
  // embeddings, every attribute satisfied with slack.
  Taxonomy tax = oracles::tiny_taxonomy();  // leaves 1,2 under root 3
  Eigen::MatrixXi labels(2, 2);
  labels << 1, 0, 0, 1;
  AttributeTable attrs({"a1", "a2"}, labels);

  Hyperparams hyper;
  hyper.lambda = 400.0;
  hyper.gamma2 = 0.0;

  EmbeddingModel m;
  m.taxonomy = tax;
  m.attribute_names = attrs.names();
  m.hyper = hyper;
  m.hyper.d_e = 2;
  m.W = Eigen::MatrixXd::Identity(2, 2);
  m.U_attr = Eigen::MatrixXd::Identity(2, 2) * 1.0;
  m.U_sup.resize(2, 1);
  m.U_sup << 5, 5;
  m.U_cat.resize(2, 2);
  m.U_cat.col(0) = m.U_sup.col(0) + m.U_attr.col(0);  // (6,5)
  m.U_cat.col(1) = m.U_sup.col(0) + m.U_attr.col(1);  // (5,6)
  m.B = Eigen::MatrixXd::Zero(2, 3);
  m.B(0, 0) = 1.0;
  m.B(1, 1) = 1.0;

  Dataset data;
  data.taxonomy = tax;
  data.attributes = attrs;
  data.X.resize(2, 2);
  data.X.row(0) = m.U_cat.col(0).transpose() * 1.2;  // correlation margin met with slack
  data.X.row(1) = m.U_cat.col(1).transpose() * 1.2;
  data.y.resize(2);
  data.y << 1, 2;

  const LossBreakdown b = total_objective(m, data, hyper);
  CHECK(b.l_s == 0.0);  // root has no siblings
  CHECK(b.l_a == 0.0);
  CHECK(b.l_c == 0.0);
  CHECK(b.reg == 0.0);
  CHECK(b.total == 0.0);
}

TEST_CASE("hinge locality: untouched classes leave l_c and l_s unchanged") {
  // Classes 1,2 close together (active hinges); class 3 far away and inert.
  Taxonomy tax({"a", "b", "far"}, {"root"}, {4, 4, 4, 0});
  Eigen::MatrixXi labels = Eigen::MatrixXi::Zero(3, 1);
  AttributeTable attrs({"x"}, labels);

  Hyperparams hyper;
  hyper.lambda = 1e6;

  EmbeddingModel m;
  m.taxonomy = tax;
  m.attribute_names = attrs.names();
  m.hyper = hyper;
  m.hyper.d_e = 2;
  m.W = Eigen::MatrixXd::Identity(2, 2);
  m.U_cat.resize(2, 3);
  m.U_cat.col(0) << 0, 0;
  m.U_cat.col(1) << 0.5, 0;  // active margin with class 1
  m.U_cat.col(2) << 100, 100;
  m.U_sup = Eigen::MatrixXd::Zero(2, 1);
  m.U_attr = Eigen::MatrixXd::Zero(2, 1);
  m.B = Eigen::MatrixXd::Zero(1, 4);

  Dataset data;
  data.taxonomy = tax;
  data.attributes = attrs;
  data.X.resize(2, 2);
  data.X << 0.1, 0.0, 0.4, 0.0;
  data.y.resize(2);
  data.y << 1, 2;

  const LossBreakdown before = total_objective(m, data, hyper);
  CHECK(before.l_c > 0.0);  // classes 1/2 genuinely compete

  m.U_cat.col(2) << 101, 99;  // perturb the inert class
  const LossBreakdown after = total_objective(m, data, hyper);
  CHECK(after.l_c == before.l_c);
  CHECK(after.l_s == before.l_s);
}

TEST_CASE("objective is convex in W and in B") {
  Rng rng(127);
  const Taxonomy tax = oracles::two_level_taxonomy();
  const AttributeTable attrs = oracles::random_attributes(tax, 3, rng);
  Hyperparams hyper;
  hyper.mu1 = 0.5;
  hyper.mu2 = 0.8;
  hyper.gamma2 = 0.3;

  for (int trial = 0; trial < 8; ++trial) {
    const EmbeddingModel base = oracles::random_model(tax, attrs, hyper, rng, {});
    const Dataset data = oracles::random_dataset(tax, attrs, rng, {});

    SUBCASE("") {}  // keep trial seeds independent of subcase reruns

    EmbeddingModel m1 = base, m2 = base, mt = base;
    m1.W = rng.normal_matrix(base.W.rows(), base.W.cols());
    m2.W = rng.normal_matrix(base.W.rows(), base.W.cols());
    const double f1 = total_objective(m1, data, hyper).total;
    const double f2 = total_objective(m2, data, hyper).total;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      mt.W = t * m1.W + (1.0 - t) * m2.W;
      const double ft = total_objective(mt, data, hyper).total;
      CHECK(ft <= t * f1 + (1.0 - t) * f2 + 1e-9);
    }

    EmbeddingModel b1 = base, b2 = base, bt = base;
    for (Eigen::Index c = 0; c < base.B.cols(); ++c) {
      if (tax.is_root(static_cast<NodeId>(c + 1))) continue;
      for (Eigen::Index a = 0; a < base.B.rows(); ++a) {
        b1.B(a, c) = rng.uniform(0.0, hyper.gamma1);
        b2.B(a, c) = rng.uniform(0.0, hyper.gamma1);
      }
    }
    const double g1 = total_objective(b1, data, hyper).total;
    const double g2 = total_objective(b2, data, hyper).total;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      bt.B = t * b1.B + (1.0 - t) * b2.B;
      const double gt = total_objective(bt, data, hyper).total;
      CHECK(gt <= t * g1 + (1.0 - t) * g2 + 1e-9);
    }
  }
}
