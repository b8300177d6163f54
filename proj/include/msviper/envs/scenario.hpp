#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace msviper::envs {

enum class EnvKind { grid, unicycle, terrain };

const char* to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& name);

/// Reward shaping constants. None of these come from a published table;
/// they are configuration.
struct RewardConfig {
  double arrival_bonus = 1.0;
  double collision_penalty = 1.0;
  double progress_scale = 0.1;
  double step_cost = 0.01;

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

/// One curriculum stage. Grid maps are measured in cells, continuous maps
/// in metres.
struct ScenarioSpec {
  EnvKind env_kind = EnvKind::grid;
  int stage = 0;
  double width = 5.0;
  double height = 5.0;
  /// Static obstacles: cells (grid) or discs (continuous).
  int obstacle_count = 0;
  /// Grid only: when >= 0, overrides obstacle_count with round(density * cells).
  double obstacle_density = -1.0;
  double obstacle_radius = 0.3;
  int dynamic_obstacles = 0;
  double obstacle_speed = 0.05;
  /// Terrain only: height-field amplitude in metres.
  double roughness = 0.0;
  int horizon = 50;
  /// Redraw the static obstacles at every reset (from the episode seed)
  /// instead of once per scenario.
  bool per_episode_obstacles = false;
  std::uint64_t rng_seed = 1;
  /// 10x7 occupancy grid instead of the 5x3 desk grid.
  bool full_layout = false;
  RewardConfig reward;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;

  /// Throws ConfigError.
  void validate() const;
};

/// Throws ConfigError unless stages ascend with nondecreasing obstacle counts
/// and share one environment kind.
void validate_curriculum(const std::vector<ScenarioSpec>& curriculum);

nlohmann::json scenario_to_json(const ScenarioSpec& spec);
/// Unknown keys are rejected with ConfigError.
ScenarioSpec scenario_from_json(const nlohmann::json& doc);

/// Curriculum document: {"curriculum": [spec, ...]}.
nlohmann::json curriculum_to_json(const std::vector<ScenarioSpec>& curriculum);
std::vector<ScenarioSpec> curriculum_from_json(const nlohmann::json& doc);

/// Grid curriculum used by the distillation experiments: an open room
/// followed by the same room with obstacles, sharing one goal cell.
std::vector<ScenarioSpec> default_grid_curriculum(std::uint64_t seed = 7);

/// The same two stages with obstacles redrawn at every episode.
std::vector<ScenarioSpec> randomized_grid_curriculum(std::uint64_t seed = 7);

}  // namespace msviper::envs
