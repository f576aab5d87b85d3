#include <cmath>
#include <vector>

#include "fit_internal.hpp"
#include "useembed/errors.hpp"
#include "useembed/solver.hpp"

namespace useembed {

namespace {

// Strict descendants of every node.
std::vector<std::vector<NodeId>> descendants_of(const Taxonomy& taxonomy) {
  const int n = taxonomy.num_nodes();
  std::vector<std::vector<NodeId>> out(n);
  for (NodeId id = 1; id <= n; ++id)
    for (NodeId a : taxonomy.ancestors(id)) out[a - 1].push_back(id);
  return out;
}

}  // namespace

namespace detail {

// Minimizes the semantic regularizer over the free columns of B inside
// [0, gamma1]. Collecting every term of R containing beta_c gives the
// column subproblem
//   ||v_c - U_attr b||^2
//   + gamma2 ( sum_{p in ancestors} ||b + beta_p||^2
//            + 2 sum_{s in siblings} ||b + beta_s||^2
//            + sum_{k in descendants} ||b + beta_k||^2 )
// (sibling pairs appear in both nodes' sums of R, hence the factor 2), a
// box-constrained convex quadratic solved exactly by coordinate descent.
Eigen::MatrixXd solve_B_masked(const Eigen::MatrixXd& U_cat, const Eigen::MatrixXd& U_sup,
                               const Eigen::MatrixXd& U_attr, const Taxonomy& taxonomy,
                               double gamma1, double gamma2, const std::vector<char>& free_cols,
                               const Eigen::MatrixXd& B_init) {
  const int C = taxonomy.num_leaves();
  const int S = taxonomy.num_supers();
  const int A = static_cast<int>(U_attr.cols());
  if (U_cat.cols() != C || U_sup.cols() != S)
    throw ValidationError("solve_B: embedding blocks do not match taxonomy");
  if (gamma1 < 0 || gamma2 < 0) throw ValidationError("solve_B: negative gamma");

  Eigen::MatrixXd B = B_init;
  if (B.rows() != A || B.cols() != C + S)
    throw ValidationError("solve_B: B_init must be A x (C+S)");
  if (A == 0) return B;

  auto column = [&](NodeId id) {
    return id <= C ? U_cat.col(id - 1) : U_sup.col(id - C - 1);
  };
  auto is_free = [&](NodeId id) {
    return !taxonomy.is_root(id) &&
           (free_cols.empty() || free_cols[static_cast<std::size_t>(id - 1)]);
  };

  const Eigen::MatrixXd G = U_attr.transpose() * U_attr;
  const auto descendants = descendants_of(taxonomy);
  const Eigen::VectorXd zero_beta = Eigen::VectorXd::Zero(A);
  auto beta_of = [&](NodeId id) -> Eigen::VectorXd {
    return taxonomy.is_root(id) ? zero_beta : Eigen::VectorXd(B.col(id - 1));
  };

  constexpr int kMaxSweeps = 1000;
  constexpr double kSweepTol = 1e-8;
  constexpr int kMaxColumnPasses = 100;
  constexpr double kColumnTol = 1e-12;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double change_sq = 0.0;
    double scale_sq = 0.0;

    for (NodeId c = 1; c <= C + S; ++c) {
      if (!is_free(c)) continue;

      const Eigen::VectorXd v = column(c) - column(taxonomy.parent(c));
      const Eigen::VectorXd Uv = U_attr.transpose() * v;

      double weight = 0.0;
      Eigen::VectorXd hsum = Eigen::VectorXd::Zero(A);
      for (NodeId p : taxonomy.ancestors(c)) {
        weight += 1.0;
        hsum += beta_of(p);
      }
      for (NodeId s : taxonomy.siblings(c)) {
        weight += 2.0;
        hsum += 2.0 * beta_of(s);
      }
      for (NodeId k : descendants[c - 1]) {
        weight += 1.0;
        hsum += beta_of(k);
      }

      Eigen::VectorXd b = B.col(c - 1);
      const Eigen::VectorXd b_before = b;
      for (int pass = 0; pass < kMaxColumnPasses; ++pass) {
        double pass_change = 0.0;
        for (int a = 0; a < A; ++a) {
          const double h_aa = G(a, a) + gamma2 * weight;
          const double grad_a =
              2.0 * (G.row(a).dot(b) + gamma2 * weight * b[a] - Uv[a] + gamma2 * hsum[a]);
          double next;
          if (h_aa > 1e-300) {
            next = std::clamp(b[a] - grad_a / (2.0 * h_aa), 0.0, gamma1);
          } else {
            // Degenerate coordinate: objective is linear in b[a].
            next = grad_a > 0.0 ? 0.0 : (grad_a < 0.0 ? gamma1 : b[a]);
            next = std::clamp(next, 0.0, gamma1);
          }
          pass_change += (next - b[a]) * (next - b[a]);
          b[a] = next;
        }
        if (pass_change <= kColumnTol * std::max(1.0, b.squaredNorm())) break;
      }
      B.col(c - 1) = b;
      change_sq += (b - b_before).squaredNorm();
      scale_sq += b_before.squaredNorm();
    }

    if (std::sqrt(change_sq) <= kSweepTol * std::max(1.0, std::sqrt(scale_sq))) break;
  }
  return B;
}

}  // namespace detail

Eigen::MatrixXd solve_B(const Eigen::MatrixXd& U_cat, const Eigen::MatrixXd& U_sup,
                        const Eigen::MatrixXd& U_attr, const Taxonomy& taxonomy, double gamma1,
                        double gamma2) {
  const Eigen::MatrixXd B0 =
      Eigen::MatrixXd::Zero(U_attr.cols(), taxonomy.num_nodes());
  return detail::solve_B_masked(U_cat, U_sup, U_attr, taxonomy, gamma1, gamma2, {}, B0);
}

}  // namespace useembed
