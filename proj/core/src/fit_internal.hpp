#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "useembed/dataset.hpp"
#include "useembed/model.hpp"
#include "useembed/solver.hpp"

namespace useembed::detail {

// Which blocks the alternating steps may move. Root columns of B are always
// pinned at zero regardless of b_free.
struct FreezeMask {
  bool update_W = true;
  bool update_U_cat = true;
  bool update_U_sup = true;
  bool update_U_attr = true;
  std::vector<char> b_free;  // one flag per node; empty means all non-root free
};

struct FitOptions {
  FreezeMask mask;
  std::optional<EmbeddingModel> init;  // skips default initialization when set
};

std::pair<EmbeddingModel, TrainReport> fit_with_options(const Dataset& dataset,
                                                        const Hyperparams& hyper,
                                                        const FitOptions& options);

StepResult step_wb_masked(const EmbeddingModel& model, const Dataset& dataset,
                          const Hyperparams& hyper, const FreezeMask& mask);
StepResult step_u_masked(const EmbeddingModel& model, const Dataset& dataset,
                         const Hyperparams& hyper, const FreezeMask& mask);

Eigen::MatrixXd solve_B_masked(const Eigen::MatrixXd& U_cat, const Eigen::MatrixXd& U_sup,
                               const Eigen::MatrixXd& U_attr, const Taxonomy& taxonomy,
                               double gamma1, double gamma2, const std::vector<char>& free_cols,
                               const Eigen::MatrixXd& B_init);

EmbeddingModel default_init(const Dataset& dataset, const Hyperparams& hyper);

}  // namespace useembed::detail
