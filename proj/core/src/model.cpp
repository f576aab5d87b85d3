#include "useembed/model.hpp"

#include <algorithm>
#include <cmath>

#include "useembed/errors.hpp"

namespace useembed {

std::string to_string(RegMode mode) {
  return mode == RegMode::constraint ? "constraint" : "penalty";
}

RegMode reg_mode_from_string(const std::string& s) {
  if (s == "constraint") return RegMode::constraint;
  if (s == "penalty") return RegMode::penalty;
  throw ValidationError("unknown regularization mode '" + s + "'");
}

void Hyperparams::validate() const {
  if (d_e < 1) throw ValidationError("hyperparams: d_e must be >= 1");
  if (lambda < 0 || mu1 < 0 || mu2 < 0 || gamma1 < 0 || gamma2 < 0)
    throw ValidationError("hyperparams: lambda, mu1, mu2, gamma1, gamma2 must be >= 0");
  if (sigma <= 0) throw ValidationError("hyperparams: sigma must be > 0");
  if (outer_iters < 1 || inner_iters < 1)
    throw ValidationError("hyperparams: iteration counts must be >= 1");
  if (tol < 0) throw ValidationError("hyperparams: tol must be >= 0");
}

Eigen::VectorXd EmbeddingModel::concept_embedding(NodeId id) const {
  const int C = num_categories();
  if (id >= 1 && id <= C) return U_cat.col(id - 1);
  if (id > C && id <= C + num_supers()) return U_sup.col(id - C - 1);
  throw ValidationError("model: node id " + std::to_string(id) + " has no embedding column");
}

namespace {

// Relative slack covering the rounding introduced by 32-bit storage.
constexpr double kNormSlack = 1e-5;

void check_column_norms(const Eigen::MatrixXd& M, double squared_bound, const char* what) {
  const double limit = squared_bound * (1.0 + kNormSlack) + 1e-12;
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    const double sq = M.col(j).squaredNorm();
    if (sq > limit)
      throw ValidationError(std::string("model: ") + what + " column " + std::to_string(j) +
                            " squared norm " + std::to_string(sq) + " exceeds bound " +
                            std::to_string(squared_bound));
  }
}

}  // namespace

void EmbeddingModel::validate() const {
  hyper.validate();
  const int C = taxonomy.num_leaves();
  const int S = taxonomy.num_supers();
  const int A = static_cast<int>(attribute_names.size());

  if (U_cat.cols() != C || U_sup.cols() != S || U_attr.cols() != A)
    throw ValidationError("model: embedding block shape does not match taxonomy/attributes");
  if (U_cat.rows() != W.rows() || U_sup.rows() != W.rows() || U_attr.rows() != W.rows())
    throw ValidationError("model: embedding dimension mismatch across blocks");
  if (B.rows() != A || B.cols() != C + S)
    throw ValidationError("model: B must be A x (C+S)");
  if (!W.allFinite() || !U_cat.allFinite() || !U_sup.allFinite() || !U_attr.allFinite() ||
      !B.allFinite())
    throw ValidationError("model: non-finite entry");

  if (hyper.reg_mode == RegMode::constraint) {
    check_column_norms(W, hyper.lambda, "W");
    check_column_norms(U_cat, hyper.lambda, "U_cat");
    check_column_norms(U_sup, hyper.lambda, "U_sup");
    check_column_norms(U_attr, hyper.attr_norm_bound(), "U_attr");

    const double box_hi = hyper.gamma1 * (1.0 + kNormSlack) + 1e-12;
    if ((B.array() < 0.0).any() || (B.array() > box_hi).any())
      throw ValidationError("model: B entry outside [0, gamma1]");
  }

  for (NodeId id = 1; id <= C + S; ++id)
    if (taxonomy.is_root(id) && B.col(id - 1).squaredNorm() != 0.0)
      throw ValidationError("model: nonzero reconstruction weights on root '" +
                            taxonomy.name(id) + "'");
}

Eigen::VectorXd embed(const EmbeddingModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.W.cols())
    throw ValidationError("embed: expected " + std::to_string(model.W.cols()) +
                          " features, got " + std::to_string(x.size()));
  return model.W * x;
}

std::vector<NodeId> predict_ranked(const EmbeddingModel& model, const Eigen::VectorXd& x) {
  const Eigen::VectorXd z = embed(model, x);
  const int C = model.num_categories();
  std::vector<std::pair<double, NodeId>> scored(C);
  for (int c = 0; c < C; ++c)
    scored[c] = {(z - model.U_cat.col(c)).squaredNorm(), static_cast<NodeId>(c + 1)};
  std::sort(scored.begin(), scored.end());
  std::vector<NodeId> out(C);
  for (int c = 0; c < C; ++c) out[c] = scored[c].second;
  return out;
}

Description describe(const EmbeddingModel& model, NodeId c, int top_k) {
  if (!model.taxonomy.contains(c))
    throw ValidationError("describe: unknown node id " + std::to_string(c));
  if (model.taxonomy.is_root(c))
    throw ValidationError("describe: node '" + model.taxonomy.name(c) +
                          "' is a root and has no decomposition");
  if (top_k < 0) throw ValidationError("describe: top_k must be >= 0");

  Description desc;
  desc.parent_name = model.taxonomy.name(model.taxonomy.parent(c));

  std::vector<std::pair<double, int>> weighted;  // (-weight, attr index) for stable ordering
  for (int a = 0; a < model.num_attributes(); ++a) {
    const double w = model.B(a, c - 1);
    if (w > 0.0) weighted.push_back({-w, a});
  }
  std::sort(weighted.begin(), weighted.end());
  const int take = std::min<int>(top_k, static_cast<int>(weighted.size()));
  for (int i = 0; i < take; ++i)
    desc.attributes.push_back({model.attribute_names[weighted[i].second], -weighted[i].first});
  return desc;
}

void quantize_to_storage(EmbeddingModel& model) {
  auto quantize = [](Eigen::MatrixXd& M) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      for (Eigen::Index i = 0; i < M.rows(); ++i)
        M(i, j) = static_cast<double>(static_cast<float>(M(i, j)));
  };
  quantize(model.W);
  quantize(model.U_cat);
  quantize(model.U_sup);
  quantize(model.U_attr);
  quantize(model.B);
}

}  // namespace useembed
