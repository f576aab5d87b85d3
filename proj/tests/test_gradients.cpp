#include <doctest.h>

#include "oracles.hpp"
#include "useembed/objective.hpp"

using namespace useembed;

namespace {

struct Point {
  EmbeddingModel model;
  Dataset data;
};

// Random model/dataset pairs resampled until every hinge argument is at
// least 1e-3 from its kink, so central differences with h = 1e-5 stay on one
// side of every kink.
Point non_kink_point(const Taxonomy& tax, const Hyperparams& hyper, std::uint64_t seed) {
  Rng rng(seed);
  const AttributeTable attrs = oracles::random_attributes(tax, 3, rng);
  oracles::FixtureOptions opt;
  opt.n = 6;
  for (int tries = 0; tries < 200; ++tries) {
    Point p{oracles::random_model(tax, attrs, hyper, rng, opt),
            oracles::random_dataset(tax, attrs, rng, opt)};
    if (oracles::min_kink_distance(p.model, p.data, hyper) > 1e-3) return p;
  }
  FAIL("could not sample a non-kink point");
  return {};
}

}  // namespace

TEST_CASE("finite differences confirm grad_W, grad_U, grad_B at random points") {
  const Taxonomy tax = oracles::two_level_taxonomy();
  Hyperparams hyper;
  hyper.mu1 = 0.6;
  hyper.mu2 = 0.9;
  hyper.gamma2 = 0.25;

  for (int point = 0; point < 20; ++point) {
    Point p = non_kink_point(tax, hyper, 1000 + point);

    const Eigen::MatrixXd gW = grad_W(p.model, p.data, hyper);
    const Eigen::MatrixXd fdW = oracles::finite_diff(p.model.W, [&](const Eigen::MatrixXd& W) {
      EmbeddingModel m = p.model;
      m.W = W;
      return total_objective(m, p.data, hyper).total;
    });
    CHECK(oracles::rel_error(gW, fdW) <= 1e-4);

    const UGrad gU = grad_U(p.model, p.data, hyper);
    const Eigen::MatrixXd fdCat =
        oracles::finite_diff(p.model.U_cat, [&](const Eigen::MatrixXd& U) {
          EmbeddingModel m = p.model;
          m.U_cat = U;
          return total_objective(m, p.data, hyper).total;
        });
    CHECK(oracles::rel_error(gU.cat, fdCat) <= 1e-4);
    const Eigen::MatrixXd fdSup =
        oracles::finite_diff(p.model.U_sup, [&](const Eigen::MatrixXd& U) {
          EmbeddingModel m = p.model;
          m.U_sup = U;
          return total_objective(m, p.data, hyper).total;
        });
    CHECK(oracles::rel_error(gU.sup, fdSup) <= 1e-4);
    const Eigen::MatrixXd fdAttr =
        oracles::finite_diff(p.model.U_attr, [&](const Eigen::MatrixXd& U) {
          EmbeddingModel m = p.model;
          m.U_attr = U;
          return total_objective(m, p.data, hyper).total;
        });
    CHECK(oracles::rel_error(gU.attr, fdAttr) <= 1e-4);

    const Eigen::MatrixXd gB = grad_B(p.model, p.data, hyper);
    const Eigen::MatrixXd fdB = oracles::finite_diff(p.model.B, [&](const Eigen::MatrixXd& B) {
      EmbeddingModel m = p.model;
      m.B = B;
      return total_objective(m, p.data, hyper).total;
    });
    CHECK(oracles::rel_error(gB, fdB) <= 1e-4);
  }
}

TEST_CASE("gradients also hold in penalty mode") {
  const Taxonomy tax = oracles::tiny_taxonomy();
  Hyperparams hyper;
  hyper.lambda = 2.0;
  hyper.mu1 = 0.0;
  hyper.mu2 = 0.0;
  hyper.reg_mode = RegMode::penalty;

  for (int point = 0; point < 5; ++point) {
    Point p = non_kink_point(tax, hyper, 2000 + point);
    const Eigen::MatrixXd gW = grad_W(p.model, p.data, hyper);
    const Eigen::MatrixXd fdW = oracles::finite_diff(p.model.W, [&](const Eigen::MatrixXd& W) {
      EmbeddingModel m = p.model;
      m.W = W;
      return total_objective(m, p.data, hyper).total;
    });
    CHECK(oracles::rel_error(gW, fdW) <= 1e-4);

    const UGrad gU = grad_U(p.model, p.data, hyper);
    const Eigen::MatrixXd fdCat =
        oracles::finite_diff(p.model.U_cat, [&](const Eigen::MatrixXd& U) {
          EmbeddingModel m = p.model;
          m.U_cat = U;
          return total_objective(m, p.data, hyper).total;
        });
    CHECK(oracles::rel_error(gU.cat, fdCat) <= 1e-4);
  }
}

TEST_CASE("all gradients vanish at a strict global minimum") {
  // Well-separated embeddings, exact reconstructions, gamma2 = 0: the
  // objective is identically zero in a neighborhood.
  Taxonomy tax = oracles::tiny_taxonomy();
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
  m.U_attr = Eigen::MatrixXd::Identity(2, 2);
  m.U_sup.resize(2, 1);
  m.U_sup << 5, 5;
  m.U_cat.resize(2, 2);
  m.U_cat.col(0) = m.U_sup.col(0) + m.U_attr.col(0);
  m.U_cat.col(1) = m.U_sup.col(0) + m.U_attr.col(1);
  m.B = Eigen::MatrixXd::Zero(2, 3);
  m.B(0, 0) = 1.0;
  m.B(1, 1) = 1.0;

  Dataset data;
  data.taxonomy = tax;
  data.attributes = attrs;
  data.X.resize(2, 2);
  data.X.row(0) = m.U_cat.col(0).transpose() * 1.2;
  data.X.row(1) = m.U_cat.col(1).transpose() * 1.2;
  data.y.resize(2);
  data.y << 1, 2;

  REQUIRE(total_objective(m, data, hyper).total == 0.0);
  CHECK(grad_W(m, data, hyper).isZero(0.0));
  const UGrad gU = grad_U(m, data, hyper);
  CHECK(gU.cat.isZero(0.0));
  CHECK(gU.sup.isZero(0.0));
  CHECK(gU.attr.isZero(0.0));
  CHECK(grad_B(m, data, hyper).isZero(0.0));
}

TEST_CASE("grad_B matches the closed form on a single reconstruction term") {
  // One leaf under a root super: only the leaf's own term and its exclusive
  // pairing with the root's zero beta survive.
  Taxonomy tax({"c"}, {"root"}, {2, 0});
  Eigen::MatrixXi labels = Eigen::MatrixXi::Zero(1, 2);
  AttributeTable attrs({"a1", "a2"}, labels);

  Hyperparams hyper;
  hyper.mu2 = 1.0;
  hyper.gamma2 = 0.4;

  Rng rng(55);
  oracles::FixtureOptions opt;
  opt.A = 2;
  opt.n = 1;
  EmbeddingModel m = oracles::random_model(tax, attrs, hyper, rng, opt);

  const Eigen::VectorXd rho =
      m.U_cat.col(0) - m.U_sup.col(0) - m.U_attr * m.B.col(0);
  const Eigen::VectorXd expected =
      -2.0 * m.U_attr.transpose() * rho + 2.0 * hyper.gamma2 * m.B.col(0);

  Dataset data = oracles::random_dataset(tax, attrs, rng, opt);
  const Eigen::MatrixXd gB = grad_B(m, data, hyper);
  CHECK(oracles::rel_error(gB.col(0), expected) < 1e-12);
  CHECK(gB.col(1).isZero(0.0));  // root column is not a variable
}
