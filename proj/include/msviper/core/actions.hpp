#pragma once

#include <map>
#include <span>
#include <vector>

namespace msviper {

using ActionId = int;

/// A motion primitive: fixed normalized velocities held for one timestep.
/// Positive angular velocity turns left (counter-clockwise).
struct ActionSpec {
  ActionId id = 0;
  double linear = 0.0;
  double angular = 0.0;

  friend bool operator==(const ActionSpec&, const ActionSpec&) = default;
};

using ActionCatalog = std::vector<ActionSpec>;

/// The 15 motion primitives of the expanded action space.
ActionCatalog default_actions();

inline constexpr ActionId kStopAction = 3;
inline constexpr ActionId kRotateRightAction = 1;
inline constexpr ActionId kRotateLeftAction = 5;

/// Throws ConfigError unless ids are 0..n-1 in order.
void validate_catalog(const ActionCatalog& actions);

bool contains_action(const ActionCatalog& actions, ActionId id);

/// Sign of the commanded angular velocity: -1, 0 or +1.
int turn_direction(const ActionSpec& action);

/// Catalog action closest (Euclidean in velocity space) to `scale` times the
/// velocities of `id`; ties go to the lower id.
ActionId reduced_magnitude_action(const ActionCatalog& actions, ActionId id, double scale = 0.4);

/// Action remap used to slow the robot down on rough terrain.
std::map<ActionId, ActionId> default_vibration_remap();

}  // namespace msviper
