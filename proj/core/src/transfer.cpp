#include <cmath>

#include "fit_internal.hpp"
#include "useembed/errors.hpp"
#include "useembed/solver.hpp"

namespace useembed {

namespace {

// Slack matching EmbeddingModel::validate, so frozen source blocks that
// validated there stay feasible here.
bool fits_bound(double squared_norm, double bound) {
  return squared_norm <= bound * (1.0 + 1e-5) + 1e-12;
}

}  // namespace

std::pair<EmbeddingModel, TrainReport> transfer_fit(const Dataset& dataset_new,
                                                    const EmbeddingModel& source_model,
                                                    const Hyperparams& hyper, TransferDict dict) {
  hyper.validate();
  if (dataset_new.n() == 0) throw ValidationError("transfer: empty dataset");
  dataset_new.validate();
  source_model.validate();
  if (dataset_new.dim() != source_model.dim())
    throw ValidationError("transfer: dataset dimension does not match source model");
  if (dataset_new.attributes.names() != source_model.attribute_names)
    throw ValidationError("transfer: dataset attributes do not match the source model's");

  const Taxonomy& tax = dataset_new.taxonomy;
  const int C = tax.num_leaves();
  const int S = tax.num_supers();
  const int d_e = source_model.embed_dim();

  // The frozen blocks pin the embedding geometry.
  Hyperparams adj = hyper;
  adj.d_e = d_e;

  // Every supercategory of the novel taxonomy must exist in the source.
  std::vector<NodeId> src_of_super(S, kNoNode);
  for (NodeId s = C + 1; s <= C + S; ++s) {
    const NodeId src = source_model.taxonomy.find(tax.name(s));
    if (src == kNoNode || source_model.taxonomy.is_leaf(src))
      throw ValidationError("transfer: supercategory '" + tax.name(s) +
                            "' absent from source taxonomy");
    src_of_super[s - C - 1] = src;
  }

  // Reconstruction dictionary: the frozen source attribute embeddings,
  // optionally extended with the source category embeddings (rescaled onto
  // the attribute-block norm bound so the model stays feasible).
  const int A_src = source_model.num_attributes();
  Eigen::MatrixXd U_dict = source_model.U_attr;
  std::vector<std::string> dict_names = source_model.attribute_names;
  if (dict == TransferDict::attrs_plus_cats) {
    const int C_src = source_model.num_categories();
    U_dict.conservativeResize(d_e, A_src + C_src);
    const double bound = adj.attr_norm_bound();
    for (int c = 0; c < C_src; ++c) {
      Eigen::VectorXd col = source_model.U_cat.col(c);
      const double sq = col.squaredNorm();
      if (sq > bound) col *= std::sqrt(bound / sq);
      U_dict.col(A_src + c) = col;
      dict_names.push_back("cat:" + source_model.taxonomy.name(c + 1));
    }
  }
  const int A_dict = static_cast<int>(U_dict.cols());

  for (int a = 0; a < A_dict; ++a)
    if (!fits_bound(U_dict.col(a).squaredNorm(), adj.attr_norm_bound()))
      throw ValidationError("transfer: dictionary entry '" + dict_names[a] +
                            "' violates the attribute norm bound; increase lambda");

  EmbeddingModel model;
  model.taxonomy = tax;
  model.attribute_names = dict_names;
  model.hyper = adj;
  model.W = source_model.W;
  model.U_attr = std::move(U_dict);

  model.U_sup.resize(d_e, S);
  for (int s = 0; s < S; ++s) {
    model.U_sup.col(s) = source_model.concept_embedding(src_of_super[s]);
    if (adj.reg_mode == RegMode::constraint &&
        !fits_bound(model.U_sup.col(s).squaredNorm(), adj.lambda))
      throw ValidationError("transfer: frozen supercategory '" + tax.name(C + s + 1) +
                            "' violates the norm bound; increase lambda");
  }

  // Frozen reconstruction weights of inherited supercategories, zero-padded
  // when the dictionary was extended.
  model.B = Eigen::MatrixXd::Zero(A_dict, C + S);
  for (int s = 0; s < S; ++s) {
    const NodeId src = src_of_super[s];
    if (!source_model.taxonomy.is_root(src))
      model.B.col(C + s).head(A_src) = source_model.B.col(src - 1);
  }

  // Novel category embeddings start at the class means of the (warm) data
  // embedding; classes without instances fall back to their parent.
  model.U_cat = Eigen::MatrixXd::Zero(d_e, C);
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(C);
  for (int i = 0; i < dataset_new.n(); ++i) {
    model.U_cat.col(dataset_new.y[i] - 1) += model.W * dataset_new.X.row(i).transpose();
    counts[dataset_new.y[i] - 1] += 1;
  }
  for (int c = 0; c < C; ++c) {
    if (counts[c] > 0)
      model.U_cat.col(c) /= counts[c];
    else if (!tax.is_root(c + 1))
      model.U_cat.col(c) = model.U_sup.col(tax.parent(c + 1) - C - 1);
  }
  if (adj.reg_mode == RegMode::constraint)
    model.U_cat = project_column_norm(model.U_cat, adj.lambda);

  detail::FreezeMask mask;
  mask.update_W = true;
  mask.update_U_cat = true;
  mask.update_U_sup = false;
  mask.update_U_attr = false;
  mask.b_free.assign(C + S, 0);
  for (NodeId leaf = 1; leaf <= C; ++leaf) mask.b_free[leaf - 1] = 1;

  // Extend the attribute table with inert zero columns for the dictionary
  // categories so dataset and model agree on the concept count.
  Dataset fit_data = dataset_new;
  if (A_dict != A_src) {
    Eigen::MatrixXi labels = Eigen::MatrixXi::Zero(C, A_dict);
    labels.leftCols(A_src) = dataset_new.attributes.labels();
    fit_data.attributes = AttributeTable(dict_names, std::move(labels));
  }

  model.B = detail::solve_B_masked(model.U_cat, model.U_sup, model.U_attr, tax, adj.gamma1,
                                   adj.gamma2, mask.b_free, model.B);

  detail::FitOptions options;
  options.mask = std::move(mask);
  options.init = std::move(model);
  return detail::fit_with_options(fit_data, adj, options);
}

}  // namespace useembed
