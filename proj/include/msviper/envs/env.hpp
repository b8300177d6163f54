#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "msviper/core/actions.hpp"
#include "msviper/core/layout.hpp"
#include "msviper/core/policy.hpp"
#include "msviper/envs/scenario.hpp"

namespace msviper::envs {

struct StepInfo {
  bool collision = false;
  bool goal_reached = false;
  bool froze_this_step = false;
};

/// Roll and pitch rates produced by one terrain step.
struct TerrainSignals {
  double omega_r = 0.0;
  double omega_p = 0.0;
};

struct StepOutcome {
  StateVector next_state;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
  TerrainSignals signals;
};

/// Episodic navigation simulator. The static map is fixed by the scenario
/// seed; start pose (and, where applicable, goal) vary with the episode index.
class Environment {
 public:
  virtual ~Environment() = default;

  /// Starts episode `episode` and returns its initial state.
  /// Throws PlacementError when no start or goal can be placed.
  virtual StateVector reset(std::uint64_t episode) = 0;
  /// Applies one action. Throws LifecycleError if called before reset or
  /// after the episode ended, ConfigError for an unknown action id.
  virtual StepOutcome step(ActionId action) = 0;

  virtual const StateLayout& layout() const = 0;
  virtual const ScenarioSpec& spec() const = 0;
  virtual const ActionCatalog& actions() const = 0;
  virtual bool done() const = 0;
  virtual int time() const = 0;
  virtual double goal_distance() const = 0;
  virtual StateVector state() const = 0;
};

std::unique_ptr<Environment> make_environment(const ScenarioSpec& spec,
                                              ActionCatalog actions = default_actions());

/// Layout that environments of this spec produce.
StateLayout layout_for(const ScenarioSpec& spec);

struct EpisodeLog {
  std::uint64_t episode = 0;
  /// states[t] is the state the action at t was chosen in.
  std::vector<StateVector> states;
  std::vector<ActionId> actions;
  std::vector<double> rewards;
  std::vector<StepInfo> infos;
  std::vector<bool> dones;
  std::vector<TerrainSignals> signals;
  bool goal_reached = false;
  bool collision = false;

  std::size_t length() const { return actions.size(); }
  double total_reward() const;
};

/// Runs `policy` from reset(episode) until done or `max_steps` steps.
/// max_steps < 0 means the scenario horizon.
EpisodeLog run_episode(Environment& env, const Policy& policy, std::uint64_t episode,
                       int max_steps = -1);

double discounted_return(const std::vector<double>& rewards, double gamma);

/// CSV rows: episode,t,f0..f{d-1},action,reward,done,collision,froze.
void write_trajectory_csv(std::ostream& out, const std::vector<EpisodeLog>& logs);

}  // namespace msviper::envs
