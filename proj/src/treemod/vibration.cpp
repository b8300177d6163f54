#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>

#include "msviper/core/errors.hpp"
#include "msviper/treemod/treemod.hpp"

namespace msviper::treemod {

std::vector<NodeId> detect_vibration_m1(const DecisionTreePolicy& tree, const std::vector<std::size_t>& group) {
  if (group.empty()) throw LayoutError("angular-velocity group is empty");
  const std::set<std::size_t> features(group.begin(), group.end());
  std::vector<NodeId> out;
  for (const auto& n : tree.nodes()) {
    if (!n.is_leaf() && features.contains(static_cast<std::size_t>(n.feature))) out.push_back(n.id);
  }
  return out;
}

RepairResult fix_vibration_m1(const DecisionTreePolicy& tree, const std::vector<NodeId>& detected, double h) {
  RepairResult result{tree, {}};
  RepairLog& log = result.log;
  log.defect = "vibration1";
  log.target_metric = "v_b_mean";
  log.detected = detected;
  log.N_1 = static_cast<long long>(tree.stats().node_count);
  for (NodeId id : detected) {
    if (!tree.has_node(id) || tree.node(id).is_leaf()) {
      throw LookupError("vibration repair target " + std::to_string(id) + " is not a branch");
    }
    const double before = tree.node(id).threshold;
    const double after = before + h;
    result.tree.set_threshold(id, after);
    log.changes.push_back({id, ChangeKind::threshold_changed, before, after});
    ++log.N_plus;
  }
  return result;
}

std::vector<double> VibrationSpaceSpec::weights() const {
  std::vector<double> w(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) w[k] = std::pow(gamma, static_cast<double>(k / 2));
  return w;
}

void VibrationSpaceSpec::validate(const StateLayout& layout) const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!std::isfinite(V_b)) throw ConfigError("V_b must be finite");
  if (indices.empty()) throw LayoutError("vibration space has no features");
  std::set<std::size_t> seen;
  for (std::size_t i : indices) {
    if (i >= layout.dimension()) throw LayoutError("vibration feature index " + std::to_string(i) + " out of range");
    if (!seen.insert(i).second) throw LayoutError("duplicate vibration feature index " + std::to_string(i));
  }
}

namespace {

std::pair<double, double> abs_range(double lo, double hi) {
  const double a = std::fabs(lo);
  const double b = std::fabs(hi);
  const double mn = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(a, b);
  return {mn, std::max(a, b)};
}

}  // namespace

std::pair<double, double> weighted_abs_range(std::span<const double> weights, std::span<const double> lower,
                                             std::span<const double> upper) {
  if (weights.size() != lower.size() || weights.size() != upper.size()) {
    throw DimensionError("weighted_abs_range: size mismatch");
  }
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const auto [a, b] = abs_range(lower[k], upper[k]);
    lo += weights[k] * a;
    hi += weights[k] * b;
  }
  return {lo, hi};
}

bool surface_intersects(const DecisionTreePolicy& tree, NodeId node, const VibrationSpaceSpec& spec) {
  const StateLayout& layout = tree.layout();
  const NodeSubspace raw = tree.subspace(node);
  const NodeSubspace box = raw.clipped(layout);
  const auto w = spec.weights();
  const std::size_t n = spec.indices.size();
  std::vector<double> lo(n), hi(n);
  for (std::size_t k = 0; k < n; ++k) {
    lo[k] = box.lower[spec.indices[k]];
    hi[k] = box.upper[spec.indices[k]];
    if (lo[k] >= hi[k]) return false;  // lower < x <= upper is empty
  }
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t f = spec.indices[k];
    const FeatureRange r = layout.range(f);
    for (double c : {raw.lower[f], raw.upper[f]}) {
      // Only split thresholds inside the feature's physical range form faces.
      if (!std::isfinite(c) || c < r.lower || c > r.upper) continue;
      double flo = w[k] * std::fabs(c);
      double fhi = flo;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == k) continue;
        const auto [a, b] = abs_range(lo[j], hi[j]);
        flo += w[j] * a;
        fhi += w[j] * b;
      }
      if (flo <= spec.V_b && spec.V_b <= fhi) return true;
    }
  }
  return false;
}

std::vector<NodeId> detect_vibration_m2(const DecisionTreePolicy& tree, const VibrationSpaceSpec& spec) {
  spec.validate(tree.layout());
  std::vector<NodeId> out;
  std::deque<NodeId> frontier{tree.root()};
  while (!frontier.empty()) {
    const NodeId id = frontier.front();
    frontier.pop_front();
    if (surface_intersects(tree, id, spec)) {
      out.push_back(id);
      continue;
    }
    const TreeNode& n = tree.node(id);
    if (!n.is_leaf()) {
      frontier.push_back(n.left);
      frontier.push_back(n.right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

RepairResult fix_vibration_m2(const DecisionTreePolicy& tree, const std::vector<NodeId>& detected,
                              const std::map<ActionId, ActionId>& M_c) {
  std::set<NodeId> leaves;
  for (NodeId id : detected) {
    if (!tree.has_node(id)) throw LookupError("vibration repair target " + std::to_string(id) + " not in tree");
    for (NodeId leaf : tree.descendant_leaves(id)) leaves.insert(leaf);
  }
  std::set<ActionId> missing;
  for (NodeId leaf : leaves) {
    if (!M_c.contains(tree.node(leaf).action)) missing.insert(tree.node(leaf).action);
  }
  if (!missing.empty()) {
    std::string ids;
    for (ActionId a : missing) ids += (ids.empty() ? "" : ", ") + std::to_string(a);
    throw ConfigError("actions outside the remap domain: " + ids);
  }
  for (const auto& [from, to] : M_c) {
    if (!contains_action(tree.actions(), to)) throw ConfigError("remap target " + std::to_string(to) + " not in catalog");
  }
  RepairResult result{tree, {}};
  RepairLog& log = result.log;
  log.defect = "vibration2";
  log.target_metric = "v_b_mean";
  log.detected = detected;
  log.N_1 = static_cast<long long>(tree.stats().node_count);
  for (NodeId leaf : leaves) {
    const ActionId before = tree.node(leaf).action;
    const ActionId after = M_c.at(before);
    if (after == before) continue;
    result.tree.set_action(leaf, after);
    log.changes.push_back({leaf, ChangeKind::action_changed, before, after});
    ++log.N_plus;
  }
  return result;
}

}  // namespace msviper::treemod
