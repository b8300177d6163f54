#include "msviper/core/layout.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "msviper/core/errors.hpp"

namespace msviper {

std::size_t StateLayout::cells_per_slice() const {
  return static_cast<std::size_t>(occupancy_columns) * static_cast<std::size_t>(occupancy_rows);
}

std::size_t StateLayout::occupancy_size() const {
  return cells_per_slice() * static_cast<std::size_t>(timesteps);
}

std::size_t StateLayout::dimension() const {
  return occupancy_size() + static_cast<std::size_t>(goal_features + prev_action_features +
                                                     extra_features);
}

std::size_t StateLayout::occupancy_index(int slot, int row, int col) const {
  return static_cast<std::size_t>(slot) * cells_per_slice() +
         static_cast<std::size_t>(row * occupancy_columns + col);
}

std::size_t StateLayout::goal_distance_index() const { return occupancy_size(); }
std::size_t StateLayout::goal_bearing_index() const { return occupancy_size() + 1; }
std::size_t StateLayout::prev_action_index() const {
  return occupancy_size() + static_cast<std::size_t>(goal_features);
}
std::size_t StateLayout::extra_index(int k) const {
  return prev_action_index() + static_cast<std::size_t>(prev_action_features) +
         static_cast<std::size_t>(k);
}

double StateLayout::column_angle(int col) const {
  const double width = 2.0 * kLidarHalfExtent / occupancy_columns;
  return -kLidarHalfExtent + (col + 0.5) * width;
}

bool StateLayout::is_right_column(int col) const { return column_angle(col) < -1e-12; }
bool StateLayout::is_left_column(int col) const { return column_angle(col) > 1e-12; }

FeatureRange StateLayout::range(std::size_t feature) const {
  if (ranges.empty()) return {};
  return ranges.at(feature);
}

const std::vector<std::size_t>& StateLayout::group(const std::string& name) const {
  const auto it = named_index_groups.find(name);
  if (it == named_index_groups.end()) throw LayoutError("layout has no index group '" + name + "'");
  return it->second;
}

bool StateLayout::has_group(const std::string& name) const {
  return named_index_groups.contains(name);
}

void StateLayout::validate() const {
  if (occupancy_columns < 0 || occupancy_rows < 0 || extra_features < 0) {
    throw LayoutError("layout counts must be nonnegative");
  }
  if (timesteps != 3) throw LayoutError("layout must stack exactly 3 timesteps");
  if (goal_features != 2) throw LayoutError("layout must carry 2 polar goal features");
  if (prev_action_features != 1) throw LayoutError("layout must carry 1 previous-action feature");
  const std::size_t dim = dimension();
  if (!ranges.empty() && ranges.size() != dim) {
    throw LayoutError("layout declares " + std::to_string(ranges.size()) + " ranges for " +
                      std::to_string(dim) + " features");
  }
  for (const auto& r : ranges) {
    if (!(r.lower <= r.upper)) throw LayoutError("feature range with lower > upper");
  }
  std::set<std::size_t> seen;
  for (const auto& [name, indices] : named_index_groups) {
    for (const std::size_t idx : indices) {
      if (idx >= dim) {
        throw LayoutError("group '" + name + "' index " + std::to_string(idx) +
                          " outside dimension " + std::to_string(dim));
      }
      if (idx >= occupancy_size() && idx < extra_index(0)) {
        throw LayoutError("group '" + name + "' overlaps goal/previous-action features");
      }
      if (!seen.insert(idx).second) {
        throw LayoutError("index " + std::to_string(idx) + " appears in more than one group");
      }
    }
  }
}

void StateLayout::check_state(std::span<const double> s) const {
  if (s.size() != dimension()) {
    throw DimensionError("state has " + std::to_string(s.size()) + " features, layout expects " +
                         std::to_string(dimension()));
  }
}

namespace {

void assign_physical_ranges(StateLayout& layout) {
  layout.ranges.assign(layout.dimension(), FeatureRange{});
  for (std::size_t i = 0; i < layout.occupancy_size(); ++i) layout.ranges[i] = {0.0, 1.0};
  layout.ranges[layout.goal_distance_index()] = {0.0, std::numeric_limits<double>::infinity()};
  layout.ranges[layout.goal_bearing_index()] = {-std::numbers::pi, std::numbers::pi};
  layout.ranges[layout.prev_action_index()] = {0.0, 14.0};
}

}  // namespace

StateLayout StateLayout::desk() {
  StateLayout layout;
  assign_physical_ranges(layout);
  return layout;
}

StateLayout StateLayout::full() {
  StateLayout layout;
  layout.occupancy_columns = 10;
  layout.occupancy_rows = 7;
  assign_physical_ranges(layout);
  return layout;
}

StateLayout StateLayout::terrain_desk() {
  StateLayout layout;
  layout.extra_features = 8;
  std::vector<std::size_t> rates;
  for (int k = 0; k < 8; ++k) rates.push_back(layout.extra_index(k));
  layout.named_index_groups[kAngularVelocityGroup] = rates;
  assign_physical_ranges(layout);
  return layout;
}

StateLayout StateLayout::terrain_full() {
  StateLayout layout;
  layout.occupancy_columns = 10;
  layout.occupancy_rows = 7;
  // 213 grid/goal/action features, then extras up to index 906 inclusive.
  layout.extra_features = 907 - 213;
  layout.named_index_groups[kAngularVelocityGroup] = {872, 873, 883, 884, 894, 895, 905, 906};
  assign_physical_ranges(layout);
  return layout;
}

}  // namespace msviper
