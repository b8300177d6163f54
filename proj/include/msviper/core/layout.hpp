#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace msviper {

using StateVector = std::vector<double>;

/// Physical range of one feature; unbounded by default.
struct FeatureRange {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  friend bool operator==(const FeatureRange&, const FeatureRange&) = default;
};

/// Name of the index group holding roll/pitch rates, ordered by lag:
/// entries 2k and 2k+1 are (omega_r, omega_p) k steps in the past.
inline constexpr const char* kAngularVelocityGroup = "angular_velocity";

/// Feature ordering of a flat state vector:
///
///   [ occupancy slot 0 | slot 1 | slot 2 | goal distance, goal bearing | previous action | extras ]
///
/// Slot 0 is the current occupancy snapshot. Inside a slot, cells are stored
/// row-major (row 0 nearest the robot, column 0 rightmost).
struct StateLayout {
  int occupancy_columns = 5;
  int occupancy_rows = 3;
  int timesteps = 3;
  int goal_features = 2;
  int prev_action_features = 1;
  int extra_features = 0;
  std::map<std::string, std::vector<std::size_t>> named_index_groups;
  /// Either empty (all features unbounded) or one entry per feature.
  std::vector<FeatureRange> ranges;

  friend bool operator==(const StateLayout&, const StateLayout&) = default;

  std::size_t cells_per_slice() const;
  std::size_t occupancy_size() const;
  std::size_t dimension() const;

  std::size_t occupancy_index(int slot, int row, int col) const;
  std::size_t goal_distance_index() const;
  std::size_t goal_bearing_index() const;
  std::size_t prev_action_index() const;
  std::size_t extra_index(int k) const;

  /// Centre angle of an occupancy column relative to the heading (radians).
  double column_angle(int col) const;
  bool is_right_column(int col) const;
  bool is_left_column(int col) const;

  FeatureRange range(std::size_t feature) const;
  const std::vector<std::size_t>& group(const std::string& name) const;
  bool has_group(const std::string& name) const;

  /// Throws LayoutError when an invariant is broken.
  void validate() const;

  /// Throws DimensionError unless `s` has exactly dimension() entries.
  void check_state(std::span<const double> s) const;

  /// 5x3 radial grid, 48 features.
  static StateLayout desk();
  /// 10x7 radial grid, 213 features.
  static StateLayout full();
  /// Desk grid plus 8 roll/pitch rate features (4 lags).
  static StateLayout terrain_desk();
  /// Full grid padded so the rate group sits at 872..906.
  static StateLayout terrain_full();
};

inline constexpr double kLidarHalfExtent = 2.0943951023931957;  // 2*pi/3

}  // namespace msviper
