#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "useembed/hyperparams.hpp"
#include "useembed/taxonomy.hpp"

namespace useembed {

// Human-readable decomposition of a category: its parent plus the positive
// reconstruction weights, heaviest first.
struct Description {
  std::string parent_name;
  std::vector<std::pair<std::string, double>> attributes;  // (name, weight)
};

// The unified semantic space: a data projection W and one embedding column
// per concept, partitioned into category / supercategory / attribute blocks,
// plus per-node reconstruction weights B. Immutable once trained; training
// produces a new value.
struct EmbeddingModel {
  Eigen::MatrixXd W;       // d_e x d
  Eigen::MatrixXd U_cat;   // d_e x C
  Eigen::MatrixXd U_sup;   // d_e x S
  Eigen::MatrixXd U_attr;  // d_e x A
  Eigen::MatrixXd B;       // A x (C+S); column k-1 is beta of node k

  Taxonomy taxonomy;
  std::vector<std::string> attribute_names;
  Hyperparams hyper;

  int dim() const { return static_cast<int>(W.cols()); }
  int embed_dim() const { return static_cast<int>(W.rows()); }
  int num_categories() const { return static_cast<int>(U_cat.cols()); }
  int num_supers() const { return static_cast<int>(U_sup.cols()); }
  int num_attributes() const { return static_cast<int>(U_attr.cols()); }
  int num_concepts() const { return num_categories() + num_supers() + num_attributes(); }

  // Embedding column of a category or supercategory node.
  Eigen::VectorXd concept_embedding(NodeId id) const;

  // Throws ValidationError when a type invariant is violated. Norm and box
  // bounds are checked with a small relative slack so models that round-trip
  // through 32-bit storage still validate.
  void validate() const;
};

// z = W x.
Eigen::VectorXd embed(const EmbeddingModel& model, const Eigen::VectorXd& x);

// Leaf categories ordered by ascending squared distance ||Wx - u_c||^2;
// ties broken by ascending node id.
std::vector<NodeId> predict_ranked(const EmbeddingModel& model, const Eigen::VectorXd& x);

// Parent name plus the positive reconstruction weights of node c, sorted by
// weight descending (ties by attribute index), truncated to top_k.
Description describe(const EmbeddingModel& model, NodeId c, int top_k);

// Rounds every matrix entry through 32-bit precision, making the model
// representable exactly by the serialized format.
void quantize_to_storage(EmbeddingModel& model);

}  // namespace useembed
