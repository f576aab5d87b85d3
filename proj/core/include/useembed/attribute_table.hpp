#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "useembed/taxonomy.hpp"

namespace useembed {

// Per-class binary attribute labels. Row c-1 holds the labels of leaf c.
class AttributeTable {
 public:
  AttributeTable() = default;
  AttributeTable(std::vector<std::string> names, Eigen::MatrixXi labels);

  int num_attributes() const { return static_cast<int>(names_.size()); }
  int num_classes() const { return static_cast<int>(labels_.rows()); }

  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int attr) const { return names_.at(attr); }
  const Eigen::MatrixXi& labels() const { return labels_; }

  bool has(NodeId leaf, int attr) const { return labels_(leaf - 1, attr) != 0; }
  // A_c: indices of attributes present for the leaf, ascending.
  std::vector<int> attributes_of(NodeId leaf) const;

  bool operator==(const AttributeTable& other) const {
    return names_ == other.names_ && labels_ == other.labels_;
  }

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXi labels_;  // C x A, entries in {0,1}
};

}  // namespace useembed
