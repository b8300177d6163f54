#include "msviper/envs/occupancy.hpp"

#include <string>

#include "msviper/core/errors.hpp"

namespace msviper::envs {

double OccupancyGeometry::ray_angle(int ray) const {
  const double sector = 2.0 * kLidarHalfExtent / columns;
  const int col = ray / rays_per_column;
  const int k = ray % rays_per_column;
  return -kLidarHalfExtent + sector * (col + (k + 0.5) / rays_per_column);
}

OccupancyGeometry continuous_geometry(bool full_layout) {
  OccupancyGeometry g;
  if (full_layout) {
    // 10 cm dead zone, then 0.2/0.2/0.2/0.3/1/1/1 m bands.
    g.columns = 10;
    g.row_edges = {0.1, 0.3, 0.5, 0.7, 1.0, 2.0, 3.0, 4.0};
    g.rays_per_column = 6;
  }
  return g;
}

OccupancyGeometry grid_geometry(bool full_layout) {
  OccupancyGeometry g;
  g.row_edges = {0.0, 1.0, 2.0, 3.0};
  if (full_layout) {
    g.columns = 10;
    g.row_edges = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
    g.rays_per_column = 6;
  }
  return g;
}

Snapshot occupancy_snapshot(const OccupancyGeometry& geometry,
                            std::span<const double> ray_ranges) {
  if (static_cast<int>(ray_ranges.size()) != geometry.ray_count()) {
    throw EncoderError("expected " + std::to_string(geometry.ray_count()) + " ray ranges, got " +
                       std::to_string(ray_ranges.size()));
  }
  const int rows = geometry.rows();
  Snapshot cells(static_cast<std::size_t>(rows * geometry.columns), 0.0);
  const double share = 1.0 / geometry.rays_per_column;
  for (int ray = 0; ray < geometry.ray_count(); ++ray) {
    const double d = ray_ranges[ray];
    if (!(d < geometry.max_range())) continue;
    int row = 0;
    while (row + 1 < rows && d >= geometry.row_edges[row + 1]) ++row;
    cells[static_cast<std::size_t>(row * geometry.columns + geometry.column_of(ray))] += share;
  }
  for (double& c : cells) {
    if (c > 1.0) c = 1.0;
  }
  return cells;
}

StateVector encode_occupancy(const StateLayout& layout, const Snapshot& current,
                             std::span<const Snapshot> history, const StateExtras& extras) {
  if (static_cast<int>(history.size()) != layout.timesteps - 1) {
    throw EncoderError("encoder needs " + std::to_string(layout.timesteps - 1) +
                       " prior snapshots, got " + std::to_string(history.size()));
  }
  if (static_cast<int>(extras.extra.size()) != layout.extra_features) {
    throw EncoderError("encoder needs " + std::to_string(layout.extra_features) +
                       " extra features, got " + std::to_string(extras.extra.size()));
  }
  StateVector s(layout.dimension(), 0.0);
  const std::size_t cells = layout.cells_per_slice();
  auto put = [&](const Snapshot& snap, int slot) {
    if (snap.size() != cells) {
      throw EncoderError("snapshot has " + std::to_string(snap.size()) + " cells, layout has " +
                         std::to_string(cells));
    }
    std::copy(snap.begin(), snap.end(), s.begin() + static_cast<std::ptrdiff_t>(slot * cells));
  };
  put(current, 0);
  for (std::size_t k = 0; k < history.size(); ++k) put(history[k], static_cast<int>(k) + 1);
  s[layout.goal_distance_index()] = extras.goal_distance;
  s[layout.goal_bearing_index()] = extras.goal_bearing;
  s[layout.prev_action_index()] = extras.prev_action;
  for (int k = 0; k < layout.extra_features; ++k) s[layout.extra_index(k)] = extras.extra[k];
  return s;
}

void OccupancyHistory::reset(const Snapshot& first) {
  slots_.assign(static_cast<std::size_t>(timesteps_), first);
}

void OccupancyHistory::push(const Snapshot& current) {
  if (slots_.empty()) {
    reset(current);
    return;
  }
  for (std::size_t k = slots_.size() - 1; k > 0; --k) slots_[k] = slots_[k - 1];
  slots_[0] = current;
}

StateVector OccupancyHistory::encode(const StateLayout& layout, const StateExtras& extras) const {
  if (slots_.empty()) throw EncoderError("occupancy history used before reset");
  return encode_occupancy(layout, slots_[0], std::span(slots_).subspan(1), extras);
}

}  // namespace msviper::envs
