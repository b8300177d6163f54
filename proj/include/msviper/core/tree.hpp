#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "msviper/core/actions.hpp"
#include "msviper/core/layout.hpp"
#include "msviper/core/policy.hpp"
#include "msviper/core/subspace.hpp"

namespace msviper {

using NodeId = int;

/// One node of a threshold tree. Branches route a state left iff
/// state[feature] <= threshold; leaves carry an action.
struct TreeNode {
  NodeId id = 0;
  int feature = -1;
  double threshold = 0.0;
  NodeId left = -1;
  NodeId right = -1;
  ActionId action = -1;

  bool is_leaf() const { return feature < 0; }

  static TreeNode leaf(NodeId id, ActionId action);
  static TreeNode branch(NodeId id, int feature, double threshold, NodeId left, NodeId right);

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeStats {
  std::size_t node_count = 0;
  std::size_t leaf_count = 0;
  std::size_t depth = 0;

  friend bool operator==(const TreeStats&, const TreeStats&) = default;
};

/// A decision-tree policy over a fixed state layout and action catalog.
///
/// Node ids equal their position in nodes(); repairs append new ids and
/// never renumber existing ones, so logs can refer to nodes across edits.
class DecisionTreePolicy final : public Policy {
 public:
  /// Validates structure; throws ConfigError on a malformed tree.
  DecisionTreePolicy(StateLayout layout, ActionCatalog actions, std::vector<TreeNode> nodes,
                     NodeId root);

  static DecisionTreePolicy single_leaf(StateLayout layout, ActionCatalog actions, ActionId action);

  ActionId act(std::span<const double> state) const override { return predict(state); }

  ActionId predict(std::span<const double> state) const;
  NodeId leaf_for(std::span<const double> state) const;

  const StateLayout& layout() const { return layout_; }
  const ActionCatalog& actions() const { return actions_; }
  std::span<const TreeNode> nodes() const { return nodes_; }
  NodeId root() const { return root_; }
  const TreeNode& node(NodeId id) const;
  bool has_node(NodeId id) const;
  std::optional<NodeId> parent(NodeId id) const;

  TreeStats stats() const;
  NodeSubspace subspace(NodeId id) const;
  std::vector<NodeId> leaves() const;
  std::vector<NodeId> descendant_leaves(NodeId id) const;
  /// Root-to-node chain, root first.
  std::vector<NodeId> path_to(NodeId id) const;

  // Edits used by the repair algorithms; the caller works on a copy.
  void set_action(NodeId leaf, ActionId action);
  void set_threshold(NodeId branch, double threshold);
  /// Turns a leaf into a branch with two fresh leaves; returns their ids.
  std::pair<NodeId, NodeId> split_leaf(NodeId leaf, int feature, double threshold,
                                       ActionId left_action, ActionId right_action);

  friend bool operator==(const DecisionTreePolicy& a, const DecisionTreePolicy& b) {
    return a.root_ == b.root_ && a.nodes_ == b.nodes_ && a.layout_ == b.layout_ &&
           a.actions_ == b.actions_;
  }

 private:
  void validate();

  StateLayout layout_;
  ActionCatalog actions_;
  std::vector<TreeNode> nodes_;
  std::vector<NodeId> parents_;
  NodeId root_ = 0;
};

}  // namespace msviper
