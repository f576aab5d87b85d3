#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "useembed/dataset.hpp"

namespace useembed {

// Ground truth behind a generated dataset: the embeddings and sparse
// reconstruction weights the generator planted, and the mixing matrix that
// lifted embeddings into feature space.
struct PlantedTruth {
  Eigen::MatrixXd U_cat;   // d_e x C  leaf embeddings (composed exactly)
  Eigen::MatrixXd U_sup;   // d_e x S
  Eigen::MatrixXd U_attr;  // d_e x A  near-orthogonal unit columns
  Eigen::MatrixXd B;       // A x (C+S) true beta*, root columns zero
  Eigen::MatrixXd M;       // d x d_e mixing, full column rank
  double sigma_n = 0.0;

  // Smallest norm bound under which the planted embeddings are feasible.
  double min_lambda() const;
};

// Complete tree: branching^depth leaves under a single root.
Taxonomy gen_taxonomy(int branching, int depth, std::uint64_t seed);

// Planted-model dataset. Every non-root node decomposes exactly as
// u_c = u_parent + U_attr beta_c with at most k_star positive weights; leaf
// embeddings are rejection-sampled until all margin constraints hold with
// slack, so the oracle model (pinv(M), planted U, planted B) has zero hinge
// loss at sigma_n = 0. Instances are x = M (u_y + noise). The attribute
// table marks attribute a present for a leaf iff the summed beta* weight on
// a along its root-to-leaf chain is positive.
std::pair<Dataset, PlantedTruth> gen_planted(const Taxonomy& taxonomy, int A, int k_star,
                                             int d, int d_e, int n_per_class, double sigma_n,
                                             double gamma1, std::uint64_t seed);

// Mean F1 over non-root nodes of the thresholded support of B_learned
// against the planted support.
double support_f1(const Eigen::MatrixXd& B_learned, const PlantedTruth& truth,
                  double threshold);

}  // namespace useembed
