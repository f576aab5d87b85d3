#include "useembed/solver.hpp"

#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>

#include "fit_internal.hpp"
#include "useembed/errors.hpp"
#include "useembed/rng.hpp"

namespace useembed {

using detail::FitOptions;
using detail::FreezeMask;

Eigen::VectorXd project_box(const Eigen::VectorXd& v, double lo, double hi) {
  if (lo > hi) throw ValidationError("project_box: lo > hi");
  return v.cwiseMax(lo).cwiseMin(hi);
}

Eigen::MatrixXd project_column_norm(const Eigen::MatrixXd& M, double squared_bound) {
  if (squared_bound <= 0.0) throw ValidationError("project_column_norm: bound must be positive");
  Eigen::MatrixXd out = M;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double sq = out.col(j).squaredNorm();
    if (sq > squared_bound) out.col(j) *= std::sqrt(squared_bound / sq);
  }
  return out;
}

namespace {

double finite_total(const EmbeddingModel& model, const Dataset& dataset,
                    const Hyperparams& hyper) {
  const double f = total_objective(model, dataset, hyper).total;
  if (!std::isfinite(f)) throw DivergenceError("objective is not finite");
  return f;
}

void apply_b_mask(Eigen::MatrixXd& gB, const Taxonomy& taxonomy,
                  const std::vector<char>& b_free) {
  for (NodeId id = 1; id <= taxonomy.num_nodes(); ++id) {
    const bool frozen =
        taxonomy.is_root(id) || (!b_free.empty() && !b_free[static_cast<std::size_t>(id - 1)]);
    if (frozen) gB.col(id - 1).setZero();
  }
}

void project_b_columns(Eigen::MatrixXd& B, const Taxonomy& taxonomy, double gamma1,
                       const std::vector<char>& b_free) {
  for (NodeId id = 1; id <= taxonomy.num_nodes(); ++id) {
    const bool frozen =
        taxonomy.is_root(id) || (!b_free.empty() && !b_free[static_cast<std::size_t>(id - 1)]);
    if (!frozen) B.col(id - 1) = B.col(id - 1).cwiseMax(0.0).cwiseMin(gamma1);
  }
}

constexpr int kMaxHalvings = 30;
constexpr double kInitialStep = 1.0;

enum class Phase { wb, u };

// One inner round of projected subgradient descent with a backtracking line
// search on the phase's blocks. Returns the accepted step size, or nullopt
// when no halving produced a decrease.
std::optional<double> descend_once(EmbeddingModel& model, const Dataset& dataset,
                                   const Hyperparams& hyper, const FreezeMask& mask, Phase phase,
                                   double& f_current) {
  const bool constrain = hyper.reg_mode == RegMode::constraint;

  Eigen::MatrixXd gW, gB;
  UGrad gU;
  double grad_sq = 0.0;
  if (phase == Phase::wb) {
    if (mask.update_W) {
      gW = grad_W(model, dataset, hyper);
      grad_sq += gW.squaredNorm();
    }
    gB = grad_B(model, dataset, hyper);
    apply_b_mask(gB, dataset.taxonomy, mask.b_free);
    grad_sq += gB.squaredNorm();
  } else {
    gU = grad_U(model, dataset, hyper);
    if (!mask.update_U_cat) gU.cat.setZero();
    if (!mask.update_U_sup) gU.sup.setZero();
    if (!mask.update_U_attr) gU.attr.setZero();
    grad_sq += gU.cat.squaredNorm() + gU.sup.squaredNorm() + gU.attr.squaredNorm();
  }
  if (grad_sq == 0.0) return 0.0;  // stationary in the free blocks

  double eta = kInitialStep;
  for (int halving = 0; halving <= kMaxHalvings; ++halving, eta *= 0.5) {
    EmbeddingModel cand = model;
    if (phase == Phase::wb) {
      if (mask.update_W) {
        cand.W -= eta * gW;
        if (constrain) cand.W = project_column_norm(cand.W, hyper.lambda);
      }
      cand.B -= eta * gB;
      project_b_columns(cand.B, dataset.taxonomy, hyper.gamma1, mask.b_free);
    } else {
      if (mask.update_U_cat) {
        cand.U_cat -= eta * gU.cat;
        if (constrain) cand.U_cat = project_column_norm(cand.U_cat, hyper.lambda);
      }
      if (mask.update_U_sup && cand.U_sup.cols() > 0) {
        cand.U_sup -= eta * gU.sup;
        if (constrain) cand.U_sup = project_column_norm(cand.U_sup, hyper.lambda);
      }
      if (mask.update_U_attr) {
        cand.U_attr -= eta * gU.attr;
        if (constrain) cand.U_attr = project_column_norm(cand.U_attr, hyper.attr_norm_bound());
      }
    }
    const double f_cand = total_objective(cand, dataset, hyper).total;
    if (std::isfinite(f_cand) && f_cand < f_current) {
      model = std::move(cand);
      f_current = f_cand;
      return eta;
    }
  }
  return std::nullopt;
}

StepResult run_phase(const EmbeddingModel& model, const Dataset& dataset,
                     const Hyperparams& hyper, const FreezeMask& mask, Phase phase) {
  StepResult result;
  result.model = model;
  double f = finite_total(model, dataset, hyper);

  bool any_accepted = false;
  for (int it = 0; it < hyper.inner_iters; ++it) {
    const auto step = descend_once(result.model, dataset, hyper, mask, phase, f);
    if (!step) {
      result.stalled = !any_accepted;
      break;
    }
    if (*step == 0.0) break;  // zero gradient, nothing to move
    result.step_size = *step;
    any_accepted = true;
  }
  return result;
}

}  // namespace

StepResult step_WB(const EmbeddingModel& model, const Dataset& dataset,
                   const Hyperparams& hyper) {
  return detail::step_wb_masked(model, dataset, hyper, FreezeMask{});
}

StepResult step_U(const EmbeddingModel& model, const Dataset& dataset, const Hyperparams& hyper) {
  return detail::step_u_masked(model, dataset, hyper, FreezeMask{});
}

namespace detail {

StepResult step_wb_masked(const EmbeddingModel& model, const Dataset& dataset,
                          const Hyperparams& hyper, const FreezeMask& mask) {
  return run_phase(model, dataset, hyper, mask, Phase::wb);
}

StepResult step_u_masked(const EmbeddingModel& model, const Dataset& dataset,
                         const Hyperparams& hyper, const FreezeMask& mask) {
  return run_phase(model, dataset, hyper, mask, Phase::u);
}

EmbeddingModel default_init(const Dataset& dataset, const Hyperparams& hyper) {
  const int d_e = hyper.d_e;
  const int C = dataset.taxonomy.num_leaves();
  const int S = dataset.taxonomy.num_supers();
  const int A = dataset.attributes.num_attributes();

  Rng rng(hyper.seed);
  EmbeddingModel model;
  model.taxonomy = dataset.taxonomy;
  model.attribute_names = dataset.attributes.names();
  model.hyper = hyper;

  // Concept columns start on the sphere of radius sqrt(lambda); attribute
  // columns on their tighter bound.
  const double radius = std::sqrt(hyper.lambda);
  const double attr_radius = std::sqrt(hyper.attr_norm_bound());
  model.U_cat.resize(d_e, C);
  for (int c = 0; c < C; ++c) model.U_cat.col(c) = rng.sphere(d_e, radius);
  model.U_sup.resize(d_e, S);
  for (int s = 0; s < S; ++s) model.U_sup.col(s) = rng.sphere(d_e, radius);
  model.U_attr.resize(d_e, A);
  for (int a = 0; a < A; ++a) model.U_attr.col(a) = rng.sphere(d_e, attr_radius);

  // W warm start: the ridge regressor compressed to d_e rows through its
  // truncated SVD.
  Hyperparams ridge_hyper = hyper;
  if (ridge_hyper.lambda == 0.0 || !std::isfinite(ridge_hyper.lambda))
    ridge_hyper.lambda = 1e-8;
  const RidgeModel ridge = fit_ridge(dataset, ridge_hyper);
  model.W = Eigen::MatrixXd::Zero(d_e, dataset.dim());
  if (ridge.M.allFinite()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ridge.M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const int k = std::min<int>(d_e, static_cast<int>(svd.singularValues().size()));
    model.W.topRows(k) = svd.singularValues().head(k).asDiagonal() *
                         svd.matrixV().leftCols(k).transpose();
  }
  if (hyper.reg_mode == RegMode::constraint) {
    if (hyper.lambda > 0.0 && std::isfinite(hyper.lambda))
      model.W = project_column_norm(model.W, hyper.lambda);
    else if (hyper.lambda == 0.0)
      model.W.setZero();
  }

  model.B = solve_B(model.U_cat, model.U_sup, model.U_attr, dataset.taxonomy, hyper.gamma1,
                    hyper.gamma2);
  return model;
}

std::pair<EmbeddingModel, TrainReport> fit_with_options(const Dataset& dataset,
                                                        const Hyperparams& hyper,
                                                        const FitOptions& options) {
  dataset.validate();
  hyper.validate();
  if (dataset.n() == 0) throw ValidationError("fit: empty dataset");

  const auto t0 = std::chrono::steady_clock::now();
  EmbeddingModel model = options.init ? *options.init : default_init(dataset, hyper);

  TrainReport report;
  report.initial = total_objective(model, dataset, hyper);
  if (!std::isfinite(report.initial.total)) throw DivergenceError("objective is not finite");

  double f_prev = report.initial.total;
  for (int outer = 0; outer < hyper.outer_iters; ++outer) {
    OuterIterRecord rec;

    StepResult wb = step_wb_masked(model, dataset, hyper, options.mask);
    model = std::move(wb.model);
    rec.after_wb = total_objective(model, dataset, hyper);
    rec.step_wb = wb.step_size;
    rec.stalled_wb = wb.stalled;
    if (wb.step_size > 0.0) report.final_step_wb = wb.step_size;

    StepResult us = step_u_masked(model, dataset, hyper, options.mask);
    model = std::move(us.model);
    rec.after_u = total_objective(model, dataset, hyper);
    rec.step_u = us.step_size;
    rec.stalled_u = us.stalled;
    if (us.step_size > 0.0) report.final_step_u = us.step_size;

    report.history.push_back(rec);
    model.validate();  // feasibility after every projection round

    const double f_now = rec.after_u.total;
    if (!std::isfinite(f_now)) throw DivergenceError("objective is not finite");
    if (std::abs(f_prev - f_now) < hyper.tol * std::max(1.0, std::abs(f_prev))) {
      report.converged = true;
      break;
    }
    f_prev = f_now;
  }

  quantize_to_storage(model);
  model.validate();
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(model), std::move(report)};
}

}  // namespace detail

std::pair<EmbeddingModel, TrainReport> fit(const Dataset& dataset, const Hyperparams& hyper) {
  return detail::fit_with_options(dataset, hyper, FitOptions{});
}

std::pair<EmbeddingModel, TrainReport> fit_lme(const Dataset& dataset, const Hyperparams& hyper) {
  Hyperparams lme = hyper;
  lme.mu1 = 0.0;
  lme.mu2 = 0.0;
  lme.reg_mode = RegMode::penalty;
  return detail::fit_with_options(dataset, lme, FitOptions{});
}

namespace {

nlohmann::json breakdown_json(const LossBreakdown& b) {
  return {{"l_c", b.l_c},          {"l_s", b.l_s},
          {"l_a", b.l_a},          {"reg", b.reg},
          {"frob_penalty", b.frob_penalty}, {"total", b.total}};
}

}  // namespace

std::string TrainReport::to_json() const {
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& rec : history) {
    iters.push_back({{"after_wb", breakdown_json(rec.after_wb)},
                     {"after_u", breakdown_json(rec.after_u)},
                     {"step_wb", rec.step_wb},
                     {"step_u", rec.step_u},
                     {"stalled_wb", rec.stalled_wb},
                     {"stalled_u", rec.stalled_u}});
  }
  nlohmann::json j = {{"initial", breakdown_json(initial)},
                      {"iterations", iters},
                      {"converged", converged},
                      {"wall_time_sec", wall_time_sec},
                      {"final_step_wb", final_step_wb},
                      {"final_step_u", final_step_u}};
  return j.dump(2);
}

}  // namespace useembed
