#pragma once

#include <Eigen/Dense>

#include "useembed/dataset.hpp"
#include "useembed/model.hpp"

namespace useembed {

// Additive decomposition of the training objective. total is always
// l_c + mu1*(l_s + l_a) + mu2*reg + frob_penalty; frob_penalty is zero in
// constraint mode.
struct LossBreakdown {
  double l_c = 0.0;
  double l_s = 0.0;
  double l_a = 0.0;
  double reg = 0.0;
  double frob_penalty = 0.0;
  double total = 0.0;
};

// Per-instance hinge losses. y is a leaf node id.

// sum_{c != y} [1 + ||Wx - u_y||^2 - ||Wx - u_c||^2]_+ over leaf categories.
double loss_category(const Eigen::MatrixXd& W, const Eigen::MatrixXd& U_cat,
                     const Eigen::VectorXd& x, NodeId y);

// For every ancestor s of y and sibling c of s:
// [1 + ||Wx - u_s||^2 - ||Wx - u_c||^2]_+. Sibling embeddings come from the
// block matching the sibling's kind.
double loss_super(const Eigen::MatrixXd& W, const Eigen::MatrixXd& U_sup,
                  const Eigen::MatrixXd& U_cat, const Taxonomy& taxonomy,
                  const Eigen::VectorXd& x, NodeId y);

// sum over attributes present for y of [sigma - (Wx)^T u_a]_+.
double loss_attr(const Eigen::MatrixXd& W, const Eigen::MatrixXd& U_attr,
                 const AttributeTable& attributes, const Eigen::VectorXd& x, NodeId y,
                 double sigma);

// Semantic regularizer over all non-root nodes c:
//   ||u_c - u_parent(c) - U_attr beta_c||^2
//   + gamma2 * sum_{o in ancestors(c) union siblings(c)} ||beta_c + beta_o||^2
// with beta of a root fixed to zero.
double reg_semantic(const Eigen::MatrixXd& U_cat, const Eigen::MatrixXd& U_sup,
                    const Eigen::MatrixXd& U_attr, const Eigen::MatrixXd& B,
                    const Taxonomy& taxonomy, double gamma2);

// Full objective over the dataset.
LossBreakdown total_objective(const EmbeddingModel& model, const Dataset& dataset,
                              const Hyperparams& hyper);

struct UGrad {
  Eigen::MatrixXd cat;
  Eigen::MatrixXd sup;
  Eigen::MatrixXd attr;
};

// Subgradients of total_objective in one variable with the others fixed.
// Hinge terms contribute their linear gradient when active (the active-side
// choice at the kink) and zero otherwise. Root columns of grad_B are zero:
// those weights are fixed, not free variables.
Eigen::MatrixXd grad_W(const EmbeddingModel& model, const Dataset& dataset,
                       const Hyperparams& hyper);
UGrad grad_U(const EmbeddingModel& model, const Dataset& dataset, const Hyperparams& hyper);
Eigen::MatrixXd grad_B(const EmbeddingModel& model, const Dataset& dataset,
                       const Hyperparams& hyper);

}  // namespace useembed
