#include "useembed/taxonomy.hpp"

#include <algorithm>

#include "useembed/errors.hpp"

namespace useembed {

Taxonomy::Taxonomy(std::vector<std::string> leaf_names, std::vector<std::string> super_names,
                   std::vector<NodeId> parent)
    : parent_(std::move(parent)), num_leaves_(static_cast<int>(leaf_names.size())) {
  names_ = std::move(leaf_names);
  names_.insert(names_.end(), std::make_move_iterator(super_names.begin()),
                std::make_move_iterator(super_names.end()));
  validate_and_index();
}

bool Taxonomy::is_leaf(NodeId id) const {
  check_node(id);
  return id <= num_leaves_;
}

bool Taxonomy::is_root(NodeId id) const {
  check_node(id);
  return parent_[id - 1] == kNoNode;
}

NodeKind Taxonomy::kind(NodeId id) const {
  return is_leaf(id) ? NodeKind::leaf : NodeKind::super;
}

NodeId Taxonomy::parent(NodeId id) const {
  check_node(id);
  return parent_[id - 1];
}

const std::string& Taxonomy::name(NodeId id) const {
  check_node(id);
  return names_[id - 1];
}

NodeId Taxonomy::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? kNoNode : it->second;
}

std::vector<NodeId> Taxonomy::ancestors(NodeId id) const {
  check_node(id);
  std::vector<NodeId> chain;
  for (NodeId p = parent_[id - 1]; p != kNoNode; p = parent_[p - 1]) chain.push_back(p);
  return chain;
}

std::vector<NodeId> Taxonomy::siblings(NodeId id) const {
  check_node(id);
  const NodeId p = parent_[id - 1];
  if (p == kNoNode) return {};
  std::vector<NodeId> out;
  for (NodeId c : children_[p - 1])
    if (c != id) out.push_back(c);
  return out;
}

const std::vector<NodeId>& Taxonomy::children(NodeId id) const {
  check_node(id);
  return children_[id - 1];
}

const std::vector<NodeId>& Taxonomy::leaves_under(NodeId id) const {
  check_node(id);
  return leaves_under_[id - 1];
}

std::vector<NodeId> Taxonomy::roots() const {
  std::vector<NodeId> out;
  for (NodeId id = 1; id <= num_nodes(); ++id)
    if (parent_[id - 1] == kNoNode) out.push_back(id);
  return out;
}

void Taxonomy::check_node(NodeId id) const {
  if (!contains(id))
    throw ValidationError("taxonomy: unknown node id " + std::to_string(id));
}

void Taxonomy::validate_and_index() {
  const int n = num_nodes();
  if (static_cast<int>(parent_.size()) != n)
    throw ValidationError("taxonomy: parent list size does not match node count");

  by_name_.reserve(names_.size());
  for (int i = 0; i < n; ++i) {
    if (names_[i].empty()) throw ValidationError("taxonomy: empty node name");
    if (!by_name_.emplace(names_[i], i + 1).second)
      throw ValidationError("taxonomy: duplicate node name '" + names_[i] + "'");
  }

  children_.assign(n, {});
  for (NodeId id = 1; id <= n; ++id) {
    const NodeId p = parent_[id - 1];
    if (p == kNoNode) continue;
    if (p < 1 || p > n)
      throw ValidationError("taxonomy: node '" + names_[id - 1] + "' has out-of-range parent");
    if (p <= num_leaves_)
      throw ValidationError("taxonomy: leaf '" + names_[p - 1] + "' used as a parent");
    children_[p - 1].push_back(id);
  }
  for (auto& c : children_) std::sort(c.begin(), c.end());

  // Walk every parent chain; more than n hops means a cycle.
  for (NodeId id = 1; id <= n; ++id) {
    int hops = 0;
    for (NodeId p = parent_[id - 1]; p != kNoNode; p = parent_[p - 1]) {
      if (++hops > n)
        throw ValidationError("taxonomy: cycle through node '" + names_[id - 1] + "'");
    }
  }

  leaves_under_.assign(n, {});
  for (NodeId leaf = 1; leaf <= num_leaves_; ++leaf) {
    leaves_under_[leaf - 1].push_back(leaf);
    for (NodeId p = parent_[leaf - 1]; p != kNoNode; p = parent_[p - 1])
      leaves_under_[p - 1].push_back(leaf);
  }
  for (auto& l : leaves_under_) std::sort(l.begin(), l.end());
}

}  // namespace useembed
