#include "useembed/objective.hpp"

#include <string>

#include "useembed/errors.hpp"
#include "useembed/parallel.hpp"

namespace useembed {

namespace {

// Shared gradient accumulator for the per-instance hinge terms. gz collects
// d(loss)/dz for one instance and is folded into grad_W by the caller; the
// U-block matrices accumulate across instances.
struct GradAccum {
  Eigen::VectorXd gz;
  Eigen::MatrixXd gU_cat;
  Eigen::MatrixXd gU_sup;
  Eigen::MatrixXd gU_attr;
};

// Hinge activity: strictly inactive terms contribute nothing; at the kink
// the active-side gradient is taken, so the gradient test is arg >= 0.
inline bool grad_active(double arg) { return arg >= 0.0; }
inline double hinge(double arg) { return arg > 0.0 ? arg : 0.0; }

double category_terms(const Eigen::MatrixXd& U_cat, const Eigen::VectorXd& z, NodeId y,
                      double weight, GradAccum* acc) {
  const int C = static_cast<int>(U_cat.cols());
  if (y < 1 || y > C)
    throw ValidationError("loss_category: label " + std::to_string(y) + " is not a leaf id");
  const Eigen::VectorXd r_y = z - U_cat.col(y - 1);
  const double d_y = r_y.squaredNorm();

  double loss = 0.0;
  for (int c = 1; c <= C; ++c) {
    if (c == y) continue;
    const Eigen::VectorXd r_c = z - U_cat.col(c - 1);
    const double arg = 1.0 + d_y - r_c.squaredNorm();
    loss += hinge(arg);
    if (acc && grad_active(arg)) {
      acc->gz += weight * 2.0 * (U_cat.col(c - 1) - U_cat.col(y - 1));
      acc->gU_cat.col(y - 1) -= weight * 2.0 * r_y;
      acc->gU_cat.col(c - 1) += weight * 2.0 * r_c;
    }
  }
  return loss;
}

double super_terms(const Eigen::MatrixXd& U_sup, const Eigen::MatrixXd& U_cat,
                   const Taxonomy& taxonomy, const Eigen::VectorXd& z, NodeId y, double weight,
                   GradAccum* acc) {
  const int C = static_cast<int>(U_cat.cols());
  if (taxonomy.num_leaves() != C || taxonomy.num_supers() != U_sup.cols())
    throw ValidationError("loss_super: embedding blocks do not match taxonomy");
  if (!taxonomy.contains(y) || !taxonomy.is_leaf(y))
    throw ValidationError("loss_super: label " + std::to_string(y) + " is not a leaf");

  auto column = [&](NodeId id) {
    return id <= C ? U_cat.col(id - 1) : U_sup.col(id - C - 1);
  };

  double loss = 0.0;
  for (NodeId s : taxonomy.ancestors(y)) {
    const Eigen::VectorXd r_s = z - U_sup.col(s - C - 1);
    const double d_s = r_s.squaredNorm();
    for (NodeId c : taxonomy.siblings(s)) {
      const Eigen::VectorXd r_c = z - column(c);
      const double arg = 1.0 + d_s - r_c.squaredNorm();
      loss += hinge(arg);
      if (acc && grad_active(arg)) {
        acc->gz += weight * 2.0 * (column(c) - U_sup.col(s - C - 1));
        acc->gU_sup.col(s - C - 1) -= weight * 2.0 * r_s;
        if (c <= C)
          acc->gU_cat.col(c - 1) += weight * 2.0 * r_c;
        else
          acc->gU_sup.col(c - C - 1) += weight * 2.0 * r_c;
      }
    }
  }
  return loss;
}

double attr_terms(const Eigen::MatrixXd& U_attr, const AttributeTable& attributes,
                  const Eigen::VectorXd& z, NodeId y, double sigma, double weight,
                  GradAccum* acc) {
  if (attributes.num_attributes() != U_attr.cols())
    throw ValidationError("loss_attr: attribute block does not match table");
  double loss = 0.0;
  for (int a = 0; a < attributes.num_attributes(); ++a) {
    if (!attributes.has(y, a)) continue;
    const double arg = sigma - z.dot(U_attr.col(a));
    loss += hinge(arg);
    if (acc && grad_active(arg)) {
      acc->gz -= weight * U_attr.col(a);
      acc->gU_attr.col(a) -= weight * z;
    }
  }
  return loss;
}

// Semantic regularizer value and (optionally) its gradients. Root beta is
// the zero vector and not a variable: root columns of B are never read and
// receive no gradient.
double reg_terms(const Eigen::MatrixXd& U_cat, const Eigen::MatrixXd& U_sup,
                 const Eigen::MatrixXd& U_attr, const Eigen::MatrixXd& B,
                 const Taxonomy& taxonomy, double gamma2, Eigen::MatrixXd* dU_cat,
                 Eigen::MatrixXd* dU_sup, Eigen::MatrixXd* dU_attr, Eigen::MatrixXd* dB) {
  const int C = taxonomy.num_leaves();
  const int S = taxonomy.num_supers();
  const int A = static_cast<int>(U_attr.cols());
  if (U_cat.cols() != C || U_sup.cols() != S)
    throw ValidationError("reg_semantic: embedding blocks do not match taxonomy");
  if (B.rows() != A || B.cols() != C + S)
    throw ValidationError("reg_semantic: B must be A x (C+S)");

  auto column = [&](NodeId id) {
    return id <= C ? U_cat.col(id - 1) : U_sup.col(id - C - 1);
  };
  auto add_u = [&](NodeId id, const Eigen::VectorXd& g) {
    if (id <= C) {
      if (dU_cat) dU_cat->col(id - 1) += g;
    } else {
      if (dU_sup) dU_sup->col(id - C - 1) += g;
    }
  };
  const Eigen::VectorXd zero_beta = Eigen::VectorXd::Zero(A);
  auto beta = [&](NodeId id) -> Eigen::VectorXd {
    return taxonomy.is_root(id) ? zero_beta : Eigen::VectorXd(B.col(id - 1));
  };

  double reg = 0.0;
  for (NodeId c = 1; c <= C + S; ++c) {
    if (taxonomy.is_root(c)) continue;
    const NodeId p = taxonomy.parent(c);
    const Eigen::VectorXd beta_c = B.col(c - 1);
    const Eigen::VectorXd rho = column(c) - column(p) - U_attr * beta_c;
    reg += rho.squaredNorm();
    if (dU_cat || dU_sup) {
      add_u(c, 2.0 * rho);
      add_u(p, -2.0 * rho);
    }
    if (dU_attr) *dU_attr -= 2.0 * rho * beta_c.transpose();
    if (dB) dB->col(c - 1) -= 2.0 * U_attr.transpose() * rho;

    for (NodeId o : taxonomy.ancestors(c)) {
      const Eigen::VectorXd pair = beta_c + beta(o);
      reg += gamma2 * pair.squaredNorm();
      if (dB) {
        dB->col(c - 1) += 2.0 * gamma2 * pair;
        if (!taxonomy.is_root(o)) dB->col(o - 1) += 2.0 * gamma2 * pair;
      }
    }
    for (NodeId o : taxonomy.siblings(c)) {
      const Eigen::VectorXd pair = beta_c + beta(o);
      reg += gamma2 * pair.squaredNorm();
      if (dB) {
        dB->col(c - 1) += 2.0 * gamma2 * pair;
        if (!taxonomy.is_root(o)) dB->col(o - 1) += 2.0 * gamma2 * pair;
      }
    }
  }
  return reg;
}

Eigen::VectorXd checked_embed(const Eigen::MatrixXd& W, const Eigen::VectorXd& x) {
  if (x.size() != W.cols())
    throw ValidationError("objective: feature length " + std::to_string(x.size()) +
                          " does not match W columns " + std::to_string(W.cols()));
  return W * x;
}

void check_model_dataset(const EmbeddingModel& model, const Dataset& dataset) {
  if (dataset.dim() != model.dim())
    throw ValidationError("objective: dataset dimension does not match model");
  if (dataset.taxonomy.num_leaves() != model.num_categories() ||
      dataset.taxonomy.num_supers() != model.num_supers() ||
      dataset.attributes.num_attributes() != model.num_attributes())
    throw ValidationError("objective: dataset concepts do not match model blocks");
}

struct InstanceSums {
  double l_c = 0.0, l_s = 0.0, l_a = 0.0;
};

InstanceSums sum_instance_losses(const EmbeddingModel& model, const Dataset& dataset,
                                 double sigma) {
  auto partials = map_chunks<InstanceSums>(dataset.n(), [&](std::size_t lo, std::size_t hi) {
    InstanceSums s;
    for (std::size_t i = lo; i < hi; ++i) {
      const Eigen::VectorXd z = model.W * dataset.X.row(i).transpose();
      const NodeId y = dataset.y[static_cast<Eigen::Index>(i)];
      s.l_c += category_terms(model.U_cat, z, y, 1.0, nullptr);
      s.l_s += super_terms(model.U_sup, model.U_cat, dataset.taxonomy, z, y, 1.0, nullptr);
      s.l_a += attr_terms(model.U_attr, dataset.attributes, z, y, sigma, 1.0, nullptr);
    }
    return s;
  });
  InstanceSums total;
  for (const auto& p : partials) {
    total.l_c += p.l_c;
    total.l_s += p.l_s;
    total.l_a += p.l_a;
  }
  return total;
}

double frob_penalty_value(const EmbeddingModel& model, const Hyperparams& hyper) {
  if (hyper.reg_mode != RegMode::penalty) return 0.0;
  return hyper.lambda * (model.W.squaredNorm() + model.U_cat.squaredNorm() +
                         model.U_sup.squaredNorm() + model.U_attr.squaredNorm());
}

struct GradPartial {
  Eigen::MatrixXd gW, gU_cat, gU_sup, gU_attr;
};

GradPartial sum_instance_grads(const EmbeddingModel& model, const Dataset& dataset,
                               const Hyperparams& hyper) {
  const int d_e = model.embed_dim();
  auto partials = map_chunks<GradPartial>(dataset.n(), [&](std::size_t lo, std::size_t hi) {
    GradPartial g;
    g.gW = Eigen::MatrixXd::Zero(d_e, model.dim());
    GradAccum acc{Eigen::VectorXd::Zero(d_e), Eigen::MatrixXd::Zero(d_e, model.num_categories()),
                  Eigen::MatrixXd::Zero(d_e, model.num_supers()),
                  Eigen::MatrixXd::Zero(d_e, model.num_attributes())};
    for (std::size_t i = lo; i < hi; ++i) {
      const Eigen::VectorXd x = dataset.X.row(i).transpose();
      const Eigen::VectorXd z = model.W * x;
      const NodeId y = dataset.y[static_cast<Eigen::Index>(i)];
      acc.gz.setZero();
      category_terms(model.U_cat, z, y, 1.0, &acc);
      super_terms(model.U_sup, model.U_cat, dataset.taxonomy, z, y, hyper.mu1, &acc);
      attr_terms(model.U_attr, dataset.attributes, z, y, hyper.sigma, hyper.mu1, &acc);
      g.gW += acc.gz * x.transpose();
    }
    g.gU_cat = std::move(acc.gU_cat);
    g.gU_sup = std::move(acc.gU_sup);
    g.gU_attr = std::move(acc.gU_attr);
    return g;
  });

  GradPartial total;
  total.gW = Eigen::MatrixXd::Zero(d_e, model.dim());
  total.gU_cat = Eigen::MatrixXd::Zero(d_e, model.num_categories());
  total.gU_sup = Eigen::MatrixXd::Zero(d_e, model.num_supers());
  total.gU_attr = Eigen::MatrixXd::Zero(d_e, model.num_attributes());
  for (const auto& p : partials) {
    total.gW += p.gW;
    total.gU_cat += p.gU_cat;
    total.gU_sup += p.gU_sup;
    total.gU_attr += p.gU_attr;
  }
  return total;
}

}  // namespace

double loss_category(const Eigen::MatrixXd& W, const Eigen::MatrixXd& U_cat,
                     const Eigen::VectorXd& x, NodeId y) {
  if (U_cat.rows() != W.rows()) throw ValidationError("loss_category: block dimension mismatch");
  return category_terms(U_cat, checked_embed(W, x), y, 1.0, nullptr);
}

double loss_super(const Eigen::MatrixXd& W, const Eigen::MatrixXd& U_sup,
                  const Eigen::MatrixXd& U_cat, const Taxonomy& taxonomy,
                  const Eigen::VectorXd& x, NodeId y) {
  if (U_sup.rows() != W.rows() || U_cat.rows() != W.rows())
    throw ValidationError("loss_super: block dimension mismatch");
  return super_terms(U_sup, U_cat, taxonomy, checked_embed(W, x), y, 1.0, nullptr);
}

double loss_attr(const Eigen::MatrixXd& W, const Eigen::MatrixXd& U_attr,
                 const AttributeTable& attributes, const Eigen::VectorXd& x, NodeId y,
                 double sigma) {
  if (U_attr.rows() != W.rows()) throw ValidationError("loss_attr: block dimension mismatch");
  return attr_terms(U_attr, attributes, checked_embed(W, x), y, sigma, 1.0, nullptr);
}

double reg_semantic(const Eigen::MatrixXd& U_cat, const Eigen::MatrixXd& U_sup,
                    const Eigen::MatrixXd& U_attr, const Eigen::MatrixXd& B,
                    const Taxonomy& taxonomy, double gamma2) {
  return reg_terms(U_cat, U_sup, U_attr, B, taxonomy, gamma2, nullptr, nullptr, nullptr, nullptr);
}

LossBreakdown total_objective(const EmbeddingModel& model, const Dataset& dataset,
                              const Hyperparams& hyper) {
  check_model_dataset(model, dataset);
  const InstanceSums sums = sum_instance_losses(model, dataset, hyper.sigma);

  LossBreakdown b;
  b.l_c = sums.l_c;
  b.l_s = sums.l_s;
  b.l_a = sums.l_a;
  b.reg = reg_semantic(model.U_cat, model.U_sup, model.U_attr, model.B, dataset.taxonomy,
                       hyper.gamma2);
  b.frob_penalty = frob_penalty_value(model, hyper);
  b.total = b.l_c + hyper.mu1 * (b.l_s + b.l_a) + hyper.mu2 * b.reg + b.frob_penalty;
  return b;
}

Eigen::MatrixXd grad_W(const EmbeddingModel& model, const Dataset& dataset,
                       const Hyperparams& hyper) {
  check_model_dataset(model, dataset);
  Eigen::MatrixXd g = sum_instance_grads(model, dataset, hyper).gW;
  if (hyper.reg_mode == RegMode::penalty) g += 2.0 * hyper.lambda * model.W;
  return g;
}

UGrad grad_U(const EmbeddingModel& model, const Dataset& dataset, const Hyperparams& hyper) {
  check_model_dataset(model, dataset);
  GradPartial inst = sum_instance_grads(model, dataset, hyper);

  Eigen::MatrixXd dR_cat = Eigen::MatrixXd::Zero(model.embed_dim(), model.num_categories());
  Eigen::MatrixXd dR_sup = Eigen::MatrixXd::Zero(model.embed_dim(), model.num_supers());
  Eigen::MatrixXd dR_attr = Eigen::MatrixXd::Zero(model.embed_dim(), model.num_attributes());
  reg_terms(model.U_cat, model.U_sup, model.U_attr, model.B, dataset.taxonomy, hyper.gamma2,
            &dR_cat, &dR_sup, &dR_attr, nullptr);

  UGrad g;
  g.cat = inst.gU_cat + hyper.mu2 * dR_cat;
  g.sup = inst.gU_sup + hyper.mu2 * dR_sup;
  g.attr = inst.gU_attr + hyper.mu2 * dR_attr;
  if (hyper.reg_mode == RegMode::penalty) {
    g.cat += 2.0 * hyper.lambda * model.U_cat;
    g.sup += 2.0 * hyper.lambda * model.U_sup;
    g.attr += 2.0 * hyper.lambda * model.U_attr;
  }
  return g;
}

Eigen::MatrixXd grad_B(const EmbeddingModel& model, const Dataset& dataset,
                       const Hyperparams& hyper) {
  check_model_dataset(model, dataset);
  Eigen::MatrixXd dB =
      Eigen::MatrixXd::Zero(model.num_attributes(), model.num_categories() + model.num_supers());
  reg_terms(model.U_cat, model.U_sup, model.U_attr, model.B, dataset.taxonomy, hyper.gamma2,
            nullptr, nullptr, nullptr, &dB);
  return hyper.mu2 * dB;
}

}  // namespace useembed
