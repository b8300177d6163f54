#include "msviper/core/actions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "msviper/core/errors.hpp"

namespace msviper {

ActionCatalog default_actions() {
  return {
      {0, 1.0, -1.0},  {1, 0.0, -1.0}, {2, 1.0, 0.0},   {3, 0.0, 0.0},   {4, 1.0, 1.0},
      {5, 0.0, 1.0},   {6, 0.4, 0.0},  {7, 0.0, -0.4},  {8, 0.0, 0.4},   {9, 1.0, -0.4},
      {10, 1.0, 0.4},  {11, 0.4, -1.0}, {12, 0.4, 1.0}, {13, 0.4, -0.4}, {14, 0.4, 0.4},
  };
}

void validate_catalog(const ActionCatalog& actions) {
  if (actions.empty()) throw ConfigError("action catalog is empty");
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].id != static_cast<ActionId>(i)) {
      throw ConfigError("action ids must be consecutive from 0; found " +
                        std::to_string(actions[i].id) + " at position " + std::to_string(i));
    }
    if (!std::isfinite(actions[i].linear) || !std::isfinite(actions[i].angular)) {
      throw ConfigError("action " + std::to_string(i) + " has non-finite velocity");
    }
  }
}

bool contains_action(const ActionCatalog& actions, ActionId id) {
  return id >= 0 && static_cast<std::size_t>(id) < actions.size();
}

int turn_direction(const ActionSpec& action) {
  if (action.angular > 0.0) return 1;
  if (action.angular < 0.0) return -1;
  return 0;
}

ActionId reduced_magnitude_action(const ActionCatalog& actions, ActionId id, double scale) {
  if (!contains_action(actions, id)) throw ConfigError("unknown action " + std::to_string(id));
  const double target_linear = scale * actions[id].linear;
  const double target_angular = scale * actions[id].angular;
  ActionId best = id;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& candidate : actions) {
    const double dl = candidate.linear - target_linear;
    const double da = candidate.angular - target_angular;
    const double dist = std::sqrt(dl * dl + da * da);
    if (dist < best_dist) {
      best_dist = dist;
      best = candidate.id;
    }
  }
  return best;
}

std::map<ActionId, ActionId> default_vibration_remap() {
  return {{0, 13}, {1, 7},   {2, 6},   {3, 3},   {4, 14},  {8, 6},   {7, 8},
          {9, 13}, {10, 14}, {11, 13}, {12, 14}, {13, 13}, {14, 14}};
}

}  // namespace msviper
