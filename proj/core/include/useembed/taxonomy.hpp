#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace useembed {

// 1-based node identifier. Leaves occupy 1..C, supercategories C+1..C+S.
using NodeId = int;
inline constexpr NodeId kNoNode = 0;

enum class NodeKind { leaf, super };

// Immutable category forest. Construction validates the parent relation
// (acyclic, leaves childless, single parent) and indexes children, ancestor
// chains and descendant leaf sets for fast lookup.
class Taxonomy {
 public:
  Taxonomy() = default;

  // leaf_names take ids 1..C in order, super_names C+1..C+S. parent has one
  // entry per node in id order; kNoNode marks a root.
  Taxonomy(std::vector<std::string> leaf_names, std::vector<std::string> super_names,
           std::vector<NodeId> parent);

  int num_leaves() const { return num_leaves_; }
  int num_supers() const { return static_cast<int>(names_.size()) - num_leaves_; }
  int num_nodes() const { return static_cast<int>(names_.size()); }

  bool contains(NodeId id) const { return id >= 1 && id <= num_nodes(); }
  bool is_leaf(NodeId id) const;
  bool is_root(NodeId id) const;
  NodeKind kind(NodeId id) const;

  NodeId parent(NodeId id) const;
  const std::string& name(NodeId id) const;
  // kNoNode when absent.
  NodeId find(const std::string& name) const;

  // Parent chain from immediate parent to root; id itself excluded.
  std::vector<NodeId> ancestors(NodeId id) const;
  // Nodes sharing the parent, id excluded, ascending; empty for roots.
  std::vector<NodeId> siblings(NodeId id) const;
  const std::vector<NodeId>& children(NodeId id) const;
  // Descendant leaves (the node itself when it is a leaf), ascending.
  const std::vector<NodeId>& leaves_under(NodeId id) const;
  std::vector<NodeId> roots() const;

  bool operator==(const Taxonomy& other) const {
    return names_ == other.names_ && parent_ == other.parent_ && num_leaves_ == other.num_leaves_;
  }

 private:
  void check_node(NodeId id) const;
  void validate_and_index();

  std::vector<std::string> names_;
  std::vector<NodeId> parent_;
  int num_leaves_ = 0;

  std::vector<std::vector<NodeId>> children_;
  std::vector<std::vector<NodeId>> leaves_under_;
  std::unordered_map<std::string, NodeId> by_name_;
};

}  // namespace useembed
