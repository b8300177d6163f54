#include <ostream>
#include <string>

#include "detail.hpp"
#include "msviper/core/errors.hpp"
#include "msviper/core/tree_io.hpp"

namespace msviper::envs {

std::unique_ptr<Environment> make_grid_environment(const ScenarioSpec&, ActionCatalog);
std::unique_ptr<Environment> make_continuous_environment(const ScenarioSpec&, ActionCatalog);

namespace detail {

EnvironmentBase::EnvironmentBase(ScenarioSpec spec, ActionCatalog actions)
    : spec_(std::move(spec)), actions_(std::move(actions)), layout_(layout_for(spec_)) {
  spec_.validate();
  validate_catalog(actions_);
}

const ActionSpec& EnvironmentBase::begin_step(ActionId action) const {
  if (!started_) throw LifecycleError("step() called before reset()");
  if (done_) throw LifecycleError("step() called after the episode ended");
  if (!contains_action(actions_, action)) {
    throw ConfigError("unknown action id " + std::to_string(action));
  }
  return actions_[static_cast<std::size_t>(action)];
}

double EnvironmentBase::shaped_reward(double before, double after, const StepInfo& info) const {
  const RewardConfig& r = spec_.reward;
  double reward = r.progress_scale * (before - after) - r.step_cost;
  if (info.goal_reached) reward += r.arrival_bonus;
  if (info.collision) reward -= r.collision_penalty;
  return reward;
}

}  // namespace detail

StateLayout layout_for(const ScenarioSpec& spec) {
  if (spec.env_kind == EnvKind::terrain) {
    return spec.full_layout ? StateLayout::terrain_full() : StateLayout::terrain_desk();
  }
  return spec.full_layout ? StateLayout::full() : StateLayout::desk();
}

std::unique_ptr<Environment> make_environment(const ScenarioSpec& spec, ActionCatalog actions) {
  if (spec.env_kind == EnvKind::grid) return make_grid_environment(spec, std::move(actions));
  return make_continuous_environment(spec, std::move(actions));
}

double EpisodeLog::total_reward() const {
  double sum = 0.0;
  for (double r : rewards) sum += r;
  return sum;
}

EpisodeLog run_episode(Environment& env, const Policy& policy, std::uint64_t episode,
                       int max_steps) {
  if (max_steps < 0) max_steps = env.spec().horizon;
  EpisodeLog log;
  log.episode = episode;
  StateVector s = env.reset(episode);
  for (int t = 0; t < max_steps && !env.done(); ++t) {
    const ActionId a = policy.act(s);
    StepOutcome out = env.step(a);
    log.states.push_back(std::move(s));
    log.actions.push_back(a);
    log.rewards.push_back(out.reward);
    log.infos.push_back(out.info);
    log.dones.push_back(out.done);
    log.signals.push_back(out.signals);
    log.goal_reached = log.goal_reached || out.info.goal_reached;
    log.collision = log.collision || out.info.collision;
    s = std::move(out.next_state);
  }
  return log;
}

double discounted_return(const std::vector<double>& rewards, double gamma) {
  double g = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) g = rewards[t] + gamma * g;
  return g;
}

void write_trajectory_csv(std::ostream& out, const std::vector<EpisodeLog>& logs) {
  std::size_t dim = 0;
  for (const auto& log : logs) {
    if (!log.states.empty()) {
      dim = log.states.front().size();
      break;
    }
  }
  out << "episode,t";
  for (std::size_t f = 0; f < dim; ++f) out << ",f" << f;
  out << ",action,reward,done,collision,froze\n";
  for (const auto& log : logs) {
    for (std::size_t t = 0; t < log.length(); ++t) {
      out << log.episode << ',' << t;
      for (double v : log.states[t]) out << ',' << format_double(v);
      const bool done = log.dones[t];
      out << ',' << log.actions[t] << ',' << format_double(log.rewards[t]) << ','
          << (done ? 1 : 0) << ',' << (log.infos[t].collision ? 1 : 0) << ','
          << (log.infos[t].froze_this_step ? 1 : 0) << '\n';
    }
  }
}

}  // namespace msviper::envs
