#pragma once

#include <cmath>
#include <numbers>

#include "msviper/envs/env.hpp"
#include "msviper/envs/occupancy.hpp"

namespace msviper::envs::detail {

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

/// Bookkeeping shared by every simulator.
class EnvironmentBase : public Environment {
 public:
  EnvironmentBase(ScenarioSpec spec, ActionCatalog actions);

  const StateLayout& layout() const override { return layout_; }
  const ScenarioSpec& spec() const override { return spec_; }
  const ActionCatalog& actions() const override { return actions_; }
  bool done() const override { return done_; }
  int time() const override { return t_; }

 protected:
  /// Throws LifecycleError / ConfigError; returns the action spec.
  const ActionSpec& begin_step(ActionId action) const;
  double shaped_reward(double before, double after, const StepInfo& info) const;

  ScenarioSpec spec_;
  ActionCatalog actions_;
  StateLayout layout_;
  OccupancyHistory history_;
  bool started_ = false;
  bool done_ = false;
  int t_ = 0;
  ActionId prev_action_ = kStopAction;
};

}  // namespace msviper::envs::detail
