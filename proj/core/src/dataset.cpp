#include "useembed/dataset.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "useembed/errors.hpp"
#include "useembed/rng.hpp"
#include "useembed/split.hpp"

namespace useembed {

AttributeTable::AttributeTable(std::vector<std::string> names, Eigen::MatrixXi labels)
    : names_(std::move(names)), labels_(std::move(labels)) {
  if (names_.empty()) throw ValidationError("attributes: at least one attribute required");
  if (labels_.cols() != static_cast<Eigen::Index>(names_.size()))
    throw ValidationError("attributes: label column count does not match name count");
  std::set<std::string> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw ValidationError("attributes: empty attribute name");
    if (!seen.insert(name).second)
      throw ValidationError("attributes: duplicate attribute name '" + name + "'");
  }
  for (Eigen::Index r = 0; r < labels_.rows(); ++r)
    for (Eigen::Index c = 0; c < labels_.cols(); ++c)
      if (labels_(r, c) != 0 && labels_(r, c) != 1)
        throw ValidationError("attributes: label outside {0,1} at class " + std::to_string(r + 1) +
                              ", attribute '" + names_[c] + "'");
}

std::vector<int> AttributeTable::attributes_of(NodeId leaf) const {
  std::vector<int> out;
  for (int a = 0; a < num_attributes(); ++a)
    if (labels_(leaf - 1, a) != 0) out.push_back(a);
  return out;
}

void Dataset::validate() const {
  if (X.rows() != y.size())
    throw ValidationError("dataset: feature row count " + std::to_string(X.rows()) +
                          " does not match label count " + std::to_string(y.size()));
  if (!X.allFinite()) throw ValidationError("dataset: non-finite feature value");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!taxonomy.contains(y[i]) || !taxonomy.is_leaf(y[i]))
      throw ValidationError("dataset: label of instance " + std::to_string(i) +
                            " is not a leaf node");
  }
  if (attributes.num_classes() != taxonomy.num_leaves())
    throw ValidationError("dataset: attribute table has " +
                          std::to_string(attributes.num_classes()) + " classes, taxonomy has " +
                          std::to_string(taxonomy.num_leaves()) + " leaves");
}

SplitIndices split_per_class(const Dataset& dataset, const SplitCounts& counts,
                             std::uint64_t seed) {
  if (counts.train < 0 || counts.val < 0 || counts.test < 0)
    throw ValidationError("split: negative split count");
  std::vector<std::vector<int>> by_class(dataset.taxonomy.num_leaves());
  for (int i = 0; i < dataset.n(); ++i) by_class[dataset.y[i] - 1].push_back(i);

  Rng rng(seed);
  SplitIndices out;
  const int need = counts.train + counts.val + counts.test;
  for (int c = 0; c < static_cast<int>(by_class.size()); ++c) {
    auto& pool = by_class[c];
    if (static_cast<int>(pool.size()) < need)
      throw ValidationError("split: class '" + dataset.taxonomy.name(c + 1) + "' has " +
                            std::to_string(pool.size()) + " instances, needs " +
                            std::to_string(need));
    rng.shuffle(pool);
    out.train.insert(out.train.end(), pool.begin(), pool.begin() + counts.train);
    out.val.insert(out.val.end(), pool.begin() + counts.train,
                   pool.begin() + counts.train + counts.val);
    out.test.insert(out.test.end(), pool.begin() + counts.train + counts.val,
                    pool.begin() + need);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Dataset subset(const Dataset& dataset, const std::vector<int>& indices) {
  Dataset out;
  out.taxonomy = dataset.taxonomy;
  out.attributes = dataset.attributes;
  out.X.resize(indices.size(), dataset.dim());
  out.y.resize(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const int i = indices[r];
    if (i < 0 || i >= dataset.n()) throw ValidationError("subset: instance index out of range");
    out.X.row(r) = dataset.X.row(i);
    out.y[r] = dataset.y[i];
  }
  return out;
}

Dataset restrict_to_leaves(const Dataset& dataset, const std::vector<NodeId>& keep_leaves) {
  const Taxonomy& tax = dataset.taxonomy;
  const int C = tax.num_leaves();
  const int S = tax.num_supers();

  std::vector<char> keep(C + 1, 0);
  for (NodeId leaf : keep_leaves) {
    if (!tax.contains(leaf) || !tax.is_leaf(leaf))
      throw ValidationError("restrict: node " + std::to_string(leaf) + " is not a leaf");
    keep[leaf] = 1;
  }

  // New ids: kept leaves first in original order, then every supercategory.
  std::vector<NodeId> new_id(C + S + 1, kNoNode);
  std::vector<std::string> leaf_names;
  for (NodeId leaf = 1; leaf <= C; ++leaf)
    if (keep[leaf]) {
      new_id[leaf] = static_cast<NodeId>(leaf_names.size()) + 1;
      leaf_names.push_back(tax.name(leaf));
    }
  const int C_new = static_cast<int>(leaf_names.size());
  if (C_new == 0) throw ValidationError("restrict: no leaves kept");
  std::vector<std::string> super_names;
  for (NodeId s = C + 1; s <= C + S; ++s) {
    new_id[s] = C_new + static_cast<NodeId>(super_names.size()) + 1;
    super_names.push_back(tax.name(s));
  }

  std::vector<NodeId> parent(C_new + S, kNoNode);
  for (NodeId id = 1; id <= C + S; ++id) {
    if (new_id[id] == kNoNode) continue;
    const NodeId p = tax.parent(id);
    parent[new_id[id] - 1] = p == kNoNode ? kNoNode : new_id[p];
  }

  Dataset out;
  out.taxonomy = Taxonomy(std::move(leaf_names), std::move(super_names), std::move(parent));

  Eigen::MatrixXi labels(C_new, dataset.attributes.num_attributes());
  for (NodeId leaf = 1; leaf <= C; ++leaf)
    if (keep[leaf]) labels.row(new_id[leaf] - 1) = dataset.attributes.labels().row(leaf - 1);
  out.attributes = AttributeTable(dataset.attributes.names(), std::move(labels));

  std::vector<int> rows;
  for (int i = 0; i < dataset.n(); ++i)
    if (keep[dataset.y[i]]) rows.push_back(i);
  out.X.resize(rows.size(), dataset.dim());
  out.y.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.X.row(r) = dataset.X.row(rows[r]);
    out.y[r] = new_id[dataset.y[rows[r]]];
  }
  return out;
}

}  // namespace useembed
