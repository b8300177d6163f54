#include "msviper/core/tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msviper/core/errors.hpp"

namespace msviper {

TreeNode TreeNode::leaf(NodeId id, ActionId action) {
  TreeNode n;
  n.id = id;
  n.action = action;
  return n;
}

TreeNode TreeNode::branch(NodeId id, int feature, double threshold, NodeId left, NodeId right) {
  TreeNode n;
  n.id = id;
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  return n;
}

DecisionTreePolicy::DecisionTreePolicy(StateLayout layout, ActionCatalog actions,
                                       std::vector<TreeNode> nodes, NodeId root)
    : layout_(std::move(layout)), actions_(std::move(actions)), nodes_(std::move(nodes)),
      root_(root) {
  validate();
}

DecisionTreePolicy DecisionTreePolicy::single_leaf(StateLayout layout, ActionCatalog actions,
                                                   ActionId action) {
  return DecisionTreePolicy(std::move(layout), std::move(actions), {TreeNode::leaf(0, action)}, 0);
}

void DecisionTreePolicy::validate() {
  layout_.validate();
  validate_catalog(actions_);
  const auto n = static_cast<NodeId>(nodes_.size());
  if (n == 0) throw ConfigError("tree has no nodes");
  // Callers may hand nodes over in any order; store them by id.
  std::vector<TreeNode> by_id(nodes_.size());
  std::vector<bool> present(nodes_.size(), false);
  for (const auto& node : nodes_) {
    if (node.id < 0 || node.id >= n || present[node.id]) {
      throw ConfigError("node ids must be unique and cover 0.." + std::to_string(n - 1));
    }
    present[node.id] = true;
    by_id[node.id] = node;
  }
  nodes_ = std::move(by_id);
  if (root_ < 0 || root_ >= n) throw ConfigError("root id " + std::to_string(root_) + " unknown");

  const auto dim = static_cast<int>(layout_.dimension());
  parents_.assign(nodes_.size(), -1);
  for (const auto& node : nodes_) {
    if (node.is_leaf()) {
      if (!contains_action(actions_, node.action)) {
        throw ConfigError("leaf " + std::to_string(node.id) + " has invalid action " +
                          std::to_string(node.action));
      }
      continue;
    }
    if (node.feature >= dim) {
      throw ConfigError("branch " + std::to_string(node.id) + " splits on feature " +
                        std::to_string(node.feature) + " outside the layout");
    }
    if (std::isnan(node.threshold)) {
      throw ConfigError("branch " + std::to_string(node.id) + " has a NaN threshold");
    }
    for (const NodeId child : {node.left, node.right}) {
      if (child < 0 || child >= n || child == root_) {
        throw ConfigError("branch " + std::to_string(node.id) + " has invalid child " +
                          std::to_string(child));
      }
      if (parents_[child] != -1) {
        throw ConfigError("node " + std::to_string(child) + " has more than one parent");
      }
      parents_[child] = node.id;
    }
  }
  // Every node must hang off the root: single parent plus full reachability
  // rules out cycles and stray components.
  std::vector<NodeId> stack{root_};
  std::size_t reached = 0;
  std::vector<bool> seen(nodes_.size(), false);
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (seen[id]) throw ConfigError("tree contains a cycle");
    seen[id] = true;
    ++reached;
    const auto& node = nodes_[id];
    if (!node.is_leaf()) {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  if (reached != nodes_.size()) throw ConfigError("tree has nodes unreachable from the root");
}

const TreeNode& DecisionTreePolicy::node(NodeId id) const {
  if (!has_node(id)) throw LookupError("unknown node id " + std::to_string(id));
  return nodes_[id];
}

bool DecisionTreePolicy::has_node(NodeId id) const {
  return id >= 0 && static_cast<std::size_t>(id) < nodes_.size();
}

std::optional<NodeId> DecisionTreePolicy::parent(NodeId id) const {
  node(id);
  if (parents_[id] < 0) return std::nullopt;
  return parents_[id];
}

NodeId DecisionTreePolicy::leaf_for(std::span<const double> state) const {
  layout_.check_state(state);
  NodeId id = root_;
  while (!nodes_[id].is_leaf()) {
    const auto& n = nodes_[id];
    id = state[n.feature] <= n.threshold ? n.left : n.right;
  }
  return id;
}

ActionId DecisionTreePolicy::predict(std::span<const double> state) const {
  return nodes_[leaf_for(state)].action;
}

TreeStats DecisionTreePolicy::stats() const {
  TreeStats s;
  s.node_count = nodes_.size();
  std::vector<std::pair<NodeId, std::size_t>> stack{{root_, 0}};
  while (!stack.empty()) {
    const auto [id, depth] = stack.back();
    stack.pop_back();
    s.depth = std::max(s.depth, depth);
    const auto& n = nodes_[id];
    if (n.is_leaf()) {
      ++s.leaf_count;
    } else {
      stack.emplace_back(n.left, depth + 1);
      stack.emplace_back(n.right, depth + 1);
    }
  }
  return s;
}

std::vector<NodeId> DecisionTreePolicy::path_to(NodeId id) const {
  node(id);
  std::vector<NodeId> path{id};
  while (parents_[path.back()] >= 0) path.push_back(parents_[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

NodeSubspace DecisionTreePolicy::subspace(NodeId id) const {
  NodeSubspace box = NodeSubspace::unbounded(layout_.dimension());
  const auto path = path_to(id);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const auto& n = nodes_[path[k]];
    const auto f = static_cast<std::size_t>(n.feature);
    if (path[k + 1] == n.left) {
      box.upper[f] = std::min(box.upper[f], n.threshold);
    } else {
      box.lower[f] = std::max(box.lower[f], n.threshold);
    }
  }
  return box;
}

std::vector<NodeId> DecisionTreePolicy::leaves() const { return descendant_leaves(root_); }

std::vector<NodeId> DecisionTreePolicy::descendant_leaves(NodeId id) const {
  node(id);
  std::vector<NodeId> out;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    const auto& n = nodes_[cur];
    if (n.is_leaf()) {
      out.push_back(cur);
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return out;
}

void DecisionTreePolicy::set_action(NodeId leaf, ActionId action) {
  const auto& n = node(leaf);
  if (!n.is_leaf()) throw LookupError("node " + std::to_string(leaf) + " is not a leaf");
  if (!contains_action(actions_, action)) {
    throw ConfigError("action " + std::to_string(action) + " is not in the catalog");
  }
  nodes_[leaf].action = action;
}

void DecisionTreePolicy::set_threshold(NodeId branch, double threshold) {
  const auto& n = node(branch);
  if (n.is_leaf()) throw LookupError("node " + std::to_string(branch) + " is not a branch");
  if (std::isnan(threshold)) throw ConfigError("threshold must not be NaN");
  nodes_[branch].threshold = threshold;
}

std::pair<NodeId, NodeId> DecisionTreePolicy::split_leaf(NodeId leaf, int feature,
                                                         double threshold, ActionId left_action,
                                                         ActionId right_action) {
  const auto& n = node(leaf);
  if (!n.is_leaf()) throw LookupError("node " + std::to_string(leaf) + " is not a leaf");
  if (feature < 0 || static_cast<std::size_t>(feature) >= layout_.dimension()) {
    throw ConfigError("split feature outside the layout");
  }
  if (!contains_action(actions_, left_action) || !contains_action(actions_, right_action)) {
    throw ConfigError("split actions must be in the catalog");
  }
  const auto left = static_cast<NodeId>(nodes_.size());
  const NodeId right = left + 1;
  nodes_.push_back(TreeNode::leaf(left, left_action));
  nodes_.push_back(TreeNode::leaf(right, right_action));
  nodes_[leaf] = TreeNode::branch(leaf, feature, threshold, left, right);
  parents_.push_back(leaf);
  parents_.push_back(leaf);
  return {left, right};
}

}  // namespace msviper
