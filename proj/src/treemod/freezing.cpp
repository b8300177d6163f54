#include <algorithm>
#include <string>

#include "msviper/core/errors.hpp"
#include "msviper/treemod/treemod.hpp"

namespace msviper::treemod {

namespace {

void require_occupancy(const StateLayout& layout) {
  if (layout.occupancy_size() == 0 || layout.timesteps < 1) {
    throw LayoutError("layout has no occupancy block");
  }
}

}  // namespace

int movement_cells(const StateLayout& layout, const NodeSubspace& clipped) {
  require_occupancy(layout);
  int moving = 0;
  for (int r = 0; r < layout.occupancy_rows; ++r) {
    for (int c = 0; c < layout.occupancy_columns; ++c) {
      const std::size_t f0 = layout.occupancy_index(0, r, c);
      for (int slot = 1; slot < layout.timesteps; ++slot) {
        const std::size_t f = layout.occupancy_index(slot, r, c);
        if (clipped.lower[f] != clipped.lower[f0] || clipped.upper[f] != clipped.upper[f0]) {
          ++moving;
          break;
        }
      }
    }
  }
  return moving;
}

std::vector<NodeId> detect_freezing(const DecisionTreePolicy& tree, const std::set<ActionId>& a_F, int m_A) {
  const StateLayout& layout = tree.layout();
  require_occupancy(layout);
  std::vector<NodeId> out;
  for (NodeId leaf : tree.leaves()) {
    if (!a_F.contains(tree.node(leaf).action)) continue;
    if (movement_cells(layout, tree.subspace(leaf).clipped(layout)) <= m_A) out.push_back(leaf);
  }
  std::sort(out.begin(), out.end());
  return out;
}

RepairResult fix_freezing(const DecisionTreePolicy& tree, const std::vector<NodeId>& detected, ActionId a_R,
                          ActionId a_L, double occupancy_threshold) {
  if (!contains_action(tree.actions(), a_R) || !contains_action(tree.actions(), a_L)) {
    throw ConfigError("a_R and a_L must be catalog actions");
  }
  const StateLayout& layout = tree.layout();
  require_occupancy(layout);
  RepairResult result{tree, {}};
  RepairLog& log = result.log;
  log.defect = "freezing";
  log.target_metric = "freezing_rate";
  log.detected = detected;
  log.N_1 = tree.stats().node_count;
  for (NodeId id : detected) {
    if (!tree.has_node(id) || !tree.node(id).is_leaf()) {
      throw LookupError("freezing repair target " + std::to_string(id) + " is not a leaf");
    }
    const NodeSubspace box = tree.subspace(id).clipped(layout);
    int right = 0;
    int left = 0;
    for (int r = 0; r < layout.occupancy_rows; ++r) {
      for (int c = 0; c < layout.occupancy_columns; ++c) {
        if (box.lower[layout.occupancy_index(0, r, c)] > occupancy_threshold) {
          if (layout.is_right_column(c)) ++right;
          if (layout.is_left_column(c)) ++left;
        }
      }
    }
    const ActionId target = right > left ? a_L : a_R;
    const ActionId before = tree.node(id).action;
    if (target != before) {
      result.tree.set_action(id, target);
      log.changes.push_back({id, ChangeKind::action_changed, before, target});
      ++log.N_plus;
    }
  }
  return result;
}

}  // namespace msviper::treemod
