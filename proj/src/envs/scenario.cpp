#include "msviper/envs/scenario.hpp"

#include <cmath>
#include <set>

#include "msviper/core/errors.hpp"

namespace msviper::envs {

using nlohmann::json;

const char* to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::grid: return "grid";
    case EnvKind::unicycle: return "unicycle";
    case EnvKind::terrain: return "terrain";
  }
  return "grid";
}

EnvKind env_kind_from_string(const std::string& name) {
  if (name == "grid") return EnvKind::grid;
  if (name == "unicycle") return EnvKind::unicycle;
  if (name == "terrain") return EnvKind::terrain;
  throw ConfigError("unknown env kind '" + name + "'");
}

void ScenarioSpec::validate() const {
  if (horizon < 1) throw ConfigError("scenario horizon must be >= 1");
  if (!(width > 0.0) || !(height > 0.0)) throw ConfigError("scenario size must be positive");
  if (obstacle_count < 0 || dynamic_obstacles < 0) {
    throw ConfigError("obstacle counts must be nonnegative");
  }
  if (obstacle_density > 1.0) throw ConfigError("obstacle_density must be <= 1");
  if (env_kind == EnvKind::grid &&
      (width != std::floor(width) || height != std::floor(height))) {
    throw ConfigError("grid scenarios need integer width and height");
  }
  if (!(roughness >= 0.0)) throw ConfigError("roughness must be >= 0");
  if (!(obstacle_radius > 0.0)) throw ConfigError("obstacle_radius must be positive");
}

void validate_curriculum(const std::vector<ScenarioSpec>& curriculum) {
  if (curriculum.empty()) throw ConfigError("curriculum is empty");
  for (std::size_t i = 0; i < curriculum.size(); ++i) {
    curriculum[i].validate();
    if (curriculum[i].env_kind != curriculum.front().env_kind) {
      throw ConfigError("curriculum mixes environment kinds");
    }
    if (curriculum[i].full_layout != curriculum.front().full_layout) {
      throw ConfigError("curriculum mixes state layouts");
    }
    if (i > 0) {
      if (curriculum[i].stage <= curriculum[i - 1].stage) {
        throw ConfigError("curriculum stages must ascend");
      }
      if (curriculum[i].obstacle_count < curriculum[i - 1].obstacle_count) {
        throw ConfigError("curriculum obstacle counts must be nondecreasing");
      }
    }
  }
}

json scenario_to_json(const ScenarioSpec& spec) {
  return {{"env", to_string(spec.env_kind)},
          {"stage", spec.stage},
          {"width", spec.width},
          {"height", spec.height},
          {"obstacle_count", spec.obstacle_count},
          {"obstacle_density", spec.obstacle_density},
          {"obstacle_radius", spec.obstacle_radius},
          {"dynamic_obstacles", spec.dynamic_obstacles},
          {"obstacle_speed", spec.obstacle_speed},
          {"roughness", spec.roughness},
          {"horizon", spec.horizon},
          {"per_episode_obstacles", spec.per_episode_obstacles},
          {"seed", spec.rng_seed},
          {"full_layout", spec.full_layout},
          {"reward",
           {{"arrival_bonus", spec.reward.arrival_bonus},
            {"collision_penalty", spec.reward.collision_penalty},
            {"progress_scale", spec.reward.progress_scale},
            {"step_cost", spec.reward.step_cost}}}};
}

namespace {

void reject_unknown(const json& doc, const std::set<std::string>& known, const char* what) {
  if (!doc.is_object()) throw ConfigError(std::string(what) + " must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + what);
    }
  }
}

template <class T>
void read_opt(const json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

ScenarioSpec scenario_from_json(const json& doc) {
  reject_unknown(doc,
                 {"env", "stage", "width", "height", "obstacle_count", "obstacle_density",
                  "obstacle_radius", "dynamic_obstacles", "obstacle_speed", "roughness",
                  "horizon", "per_episode_obstacles", "seed", "full_layout", "reward"},
                 "scenario");
  ScenarioSpec spec;
  std::string env = to_string(spec.env_kind);
  read_opt(doc, "env", env);
  spec.env_kind = env_kind_from_string(env);
  read_opt(doc, "stage", spec.stage);
  read_opt(doc, "width", spec.width);
  read_opt(doc, "height", spec.height);
  read_opt(doc, "obstacle_count", spec.obstacle_count);
  read_opt(doc, "obstacle_density", spec.obstacle_density);
  read_opt(doc, "obstacle_radius", spec.obstacle_radius);
  read_opt(doc, "dynamic_obstacles", spec.dynamic_obstacles);
  read_opt(doc, "obstacle_speed", spec.obstacle_speed);
  read_opt(doc, "roughness", spec.roughness);
  read_opt(doc, "horizon", spec.horizon);
  read_opt(doc, "per_episode_obstacles", spec.per_episode_obstacles);
  read_opt(doc, "seed", spec.rng_seed);
  read_opt(doc, "full_layout", spec.full_layout);
  if (doc.contains("reward")) {
    const auto& r = doc.at("reward");
    reject_unknown(r, {"arrival_bonus", "collision_penalty", "progress_scale", "step_cost"},
                   "reward");
    read_opt(r, "arrival_bonus", spec.reward.arrival_bonus);
    read_opt(r, "collision_penalty", spec.reward.collision_penalty);
    read_opt(r, "progress_scale", spec.reward.progress_scale);
    read_opt(r, "step_cost", spec.reward.step_cost);
  }
  spec.validate();
  return spec;
}

json curriculum_to_json(const std::vector<ScenarioSpec>& curriculum) {
  json arr = json::array();
  for (const auto& s : curriculum) arr.push_back(scenario_to_json(s));
  return {{"curriculum", arr}};
}

std::vector<ScenarioSpec> curriculum_from_json(const json& doc) {
  const json* list = &doc;
  if (doc.is_object()) {
    reject_unknown(doc, {"curriculum"}, "curriculum document");
    if (!doc.contains("curriculum")) throw ConfigError("missing 'curriculum'");
    list = &doc.at("curriculum");
  }
  if (!list->is_array()) throw ConfigError("curriculum must be an array");
  std::vector<ScenarioSpec> out;
  for (const auto& s : *list) out.push_back(scenario_from_json(s));
  validate_curriculum(out);
  return out;
}

std::vector<ScenarioSpec> default_grid_curriculum(std::uint64_t seed) {
  ScenarioSpec open;
  open.env_kind = EnvKind::grid;
  open.stage = 0;
  open.width = 7;
  open.height = 7;
  open.obstacle_count = 0;
  open.horizon = 40;
  open.rng_seed = seed;
  ScenarioSpec cluttered = open;
  cluttered.stage = 1;
  cluttered.obstacle_count = 6;
  return {open, cluttered};
}

std::vector<ScenarioSpec> randomized_grid_curriculum(std::uint64_t seed) {
  auto stages = default_grid_curriculum(seed);
  for (auto& s : stages) s.per_episode_obstacles = true;
  return stages;
}

}  // namespace msviper::envs
