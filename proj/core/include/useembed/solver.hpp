#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "useembed/dataset.hpp"
#include "useembed/model.hpp"
#include "useembed/objective.hpp"

namespace useembed {

// One alternation round: objective after the W,B sub-step and after the U
// sub-step, with the last accepted step size of each.
struct OuterIterRecord {
  LossBreakdown after_wb;
  LossBreakdown after_u;
  double step_wb = 0.0;
  double step_u = 0.0;
  bool stalled_wb = false;
  bool stalled_u = false;
};

struct TrainReport {
  LossBreakdown initial;
  std::vector<OuterIterRecord> history;  // one entry per outer iteration
  bool converged = false;
  double wall_time_sec = 0.0;  // the only timing-dependent field
  double final_step_wb = 0.0;
  double final_step_u = 0.0;

  std::string to_json() const;
};

struct StepResult {
  EmbeddingModel model;
  double step_size = 0.0;  // last accepted step; 0 when nothing moved
  bool stalled = false;    // line search found no decrease
};

// Elementwise clamp to [lo, hi].
Eigen::VectorXd project_box(const Eigen::VectorXd& v, double lo, double hi);

// Columns with squared norm above the bound are rescaled onto the sphere of
// squared norm == bound; the rest pass through untouched.
Eigen::MatrixXd project_column_norm(const Eigen::MatrixXd& M, double squared_bound);

// Minimizer of reg_semantic over B within [0, gamma1], computed by cyclic
// block-coordinate descent over columns until the relative change of a full
// sweep drops below 1e-8. Root columns stay zero.
Eigen::MatrixXd solve_B(const Eigen::MatrixXd& U_cat, const Eigen::MatrixXd& U_sup,
                        const Eigen::MatrixXd& U_attr, const Taxonomy& taxonomy,
                        double gamma1, double gamma2);

// Projected-subgradient descent with backtracking line search on W and B
// jointly (U fixed), and on all U blocks (W, B fixed). Both guarantee
// objective non-increase; a failed line search returns the model unchanged
// with the stall flag set.
StepResult step_WB(const EmbeddingModel& model, const Dataset& dataset,
                   const Hyperparams& hyper);
StepResult step_U(const EmbeddingModel& model, const Dataset& dataset,
                  const Hyperparams& hyper);

// Alternating minimization of the full objective. Stops after
// hyper.outer_iters rounds or when the relative objective change falls below
// hyper.tol.
std::pair<EmbeddingModel, TrainReport> fit(const Dataset& dataset, const Hyperparams& hyper);

// Large-margin embedding baseline: category loss only, Frobenius-penalty
// regularization. Equivalent to fit with mu1 = mu2 = 0 in penalty mode.
std::pair<EmbeddingModel, TrainReport> fit_lme(const Dataset& dataset, const Hyperparams& hyper);

// One-hot ridge regressor baseline, d -> m.
struct RidgeModel {
  Eigen::MatrixXd M;  // m x d
  Taxonomy taxonomy;
};

// Closed-form minimizer of sum ||M x_i - e_{y_i}||^2 + lambda ||M||_F^2.
RidgeModel fit_ridge(const Dataset& dataset, const Hyperparams& hyper);

// Leaves sorted by descending score (M x)_c, ties toward the smaller id.
std::vector<NodeId> ridge_predict_ranked(const RidgeModel& model, const Eigen::VectorXd& x);

// Reconstruction dictionary used when transferring to novel categories.
enum class TransferDict { attrs, attrs_plus_cats };

// Few-shot knowledge transfer. dataset_new holds novel leaf categories
// attached under supercategories of the (frozen) source model; the solver
// learns W, the novel category embeddings and their reconstruction weights,
// while supercategory embeddings and the dictionary stay fixed at their
// source values.
std::pair<EmbeddingModel, TrainReport> transfer_fit(const Dataset& dataset_new,
                                                    const EmbeddingModel& source_model,
                                                    const Hyperparams& hyper,
                                                    TransferDict dict = TransferDict::attrs);

}  // namespace useembed
