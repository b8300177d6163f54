#pragma once

#include <span>
#include <vector>

#include "msviper/core/layout.hpp"

namespace msviper::envs {

/// Radial lidar-style grid: `columns` equal angular sectors spanning
/// [-2pi/3, 2pi/3] around the heading and `row_edges.size() - 1` range bands.
struct OccupancyGeometry {
  int columns = 5;
  std::vector<double> row_edges{0.1, 0.4, 0.9, 1.9};
  int rays_per_column = 8;

  int rows() const { return static_cast<int>(row_edges.size()) - 1; }
  int ray_count() const { return columns * rays_per_column; }
  double max_range() const { return row_edges.back(); }
  /// Angle of ray r (0-based, rightmost first) relative to the heading.
  double ray_angle(int ray) const;
  int column_of(int ray) const { return ray / rays_per_column; }
};

/// Ray-band bins used for the continuous environments.
OccupancyGeometry continuous_geometry(bool full_layout);
/// Same sectors with range bands measured in grid cells.
OccupancyGeometry grid_geometry(bool full_layout);

using Snapshot = std::vector<double>;

/// Turns raw ray ranges into one occupancy snapshot (rows x columns,
/// row-major). Each cell is the fraction of its column's rays whose first
/// return falls inside that range band; returns closer than the first edge
/// count toward row 0, returns at or beyond max range are ignored.
Snapshot occupancy_snapshot(const OccupancyGeometry& geometry, std::span<const double> ray_ranges);

/// Everything besides the occupancy block that goes into a state vector.
struct StateExtras {
  double goal_distance = 0.0;
  double goal_bearing = 0.0;
  double prev_action = 0.0;
  std::vector<double> extra;
};

/// Assembles a state: `current` goes to slot 0, `history` (newest first,
/// exactly timesteps - 1 snapshots) to slots 1..timesteps-1.
/// Throws EncoderError when history or snapshot sizes do not match.
StateVector encode_occupancy(const StateLayout& layout, const Snapshot& current,
                             std::span<const Snapshot> history, const StateExtras& extras);

/// Rolling buffer of the most recent snapshots, newest first.
class OccupancyHistory {
 public:
  explicit OccupancyHistory(int timesteps = 3) : timesteps_(timesteps) {}

  /// Replicates `first` across every slot.
  void reset(const Snapshot& first);
  /// Shifts older snapshots back and stores `current` in slot 0.
  void push(const Snapshot& current);

  const std::vector<Snapshot>& slots() const { return slots_; }
  StateVector encode(const StateLayout& layout, const StateExtras& extras) const;

 private:
  int timesteps_;
  std::vector<Snapshot> slots_;
};

}  // namespace msviper::envs
