#include <algorithm>

#include "useembed/errors.hpp"
#include "useembed/solver.hpp"

namespace useembed {

RidgeModel fit_ridge(const Dataset& dataset, const Hyperparams& hyper) {
  dataset.validate();
  hyper.validate();
  if (dataset.n() < 1) throw ValidationError("fit_ridge: empty dataset");

  const int d = dataset.dim();
  const int m = dataset.num_concepts();

  // Normal equations (X^T X + lambda I) M^T = X^T Y with one-hot targets at
  // the leaf coordinate of each label.
  Eigen::MatrixXd lhs = dataset.X.transpose() * dataset.X;
  lhs.diagonal().array() += hyper.lambda;

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(d, m);
  for (int i = 0; i < dataset.n(); ++i)
    rhs.col(dataset.y[i] - 1) += dataset.X.row(i).transpose();

  RidgeModel model;
  model.M = lhs.ldlt().solve(rhs).transpose();
  model.taxonomy = dataset.taxonomy;
  return model;
}

std::vector<NodeId> ridge_predict_ranked(const RidgeModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.M.cols())
    throw ValidationError("ridge predict: expected " + std::to_string(model.M.cols()) +
                          " features, got " + std::to_string(x.size()));
  const Eigen::VectorXd scores = model.M * x;
  const int C = model.taxonomy.num_leaves();
  std::vector<std::pair<double, NodeId>> scored(C);
  for (int c = 0; c < C; ++c) scored[c] = {-scores[c], static_cast<NodeId>(c + 1)};
  std::sort(scored.begin(), scored.end());
  std::vector<NodeId> out(C);
  for (int c = 0; c < C; ++c) out[c] = scored[c].second;
  return out;
}

}  // namespace useembed
