#pragma once

#include <Eigen/Dense>

#include "useembed/attribute_table.hpp"
#include "useembed/taxonomy.hpp"

namespace useembed {

// Labeled feature vectors bound to a taxonomy and attribute table. Instances
// are rows of X; y holds leaf node ids.
struct Dataset {
  Eigen::MatrixXd X;  // N x d
  Eigen::VectorXi y;  // N entries, leaf ids
  Taxonomy taxonomy;
  AttributeTable attributes;

  int n() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }
  // m = C + S + A, the concept count any model trained on this data embeds.
  int num_concepts() const {
    return taxonomy.num_nodes() + attributes.num_attributes();
  }

  // Throws ValidationError on any violated invariant.
  void validate() const;
};

}  // namespace useembed
