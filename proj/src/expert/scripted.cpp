#include <cmath>
#include <numbers>

#include "msviper/core/errors.hpp"
#include "msviper/expert/expert.hpp"

namespace msviper::expert {

using nlohmann::json;

namespace {

double signed_level(double desired) {
  const double mag = std::abs(desired);
  const double level = mag < 0.2 ? 0.0 : (mag < 0.7 ? 0.4 : 1.0);
  return desired < 0.0 ? -level : level;
}

class ScriptedExpert final : public ExpertPolicy {
 public:
  ScriptedExpert(std::string kind, StateLayout layout, ScriptedParams params, ActionCatalog actions)
      : kind_(std::move(kind)),
        layout_(std::move(layout)),
        params_(params),
        actions_(std::move(actions)) {
    layout_.validate();
    if (kind_ == "terrain_speedy" && !layout_.has_group(kAngularVelocityGroup)) {
      throw ConfigError("terrain_speedy needs a layout with the angular-velocity group");
    }
  }

  ActionId act(std::span<const double> s) const override {
    layout_.check_state(s);
    if (kind_ == "potential_field") return potential_field(s);
    if (kind_ == "freezing_flawed") {
      for (int c = 0; c < layout_.occupancy_columns; ++c) {
        if (s[layout_.occupancy_index(0, 0, c)] > params_.freeze_threshold) return kStopAction;
      }
      return potential_field(s);
    }
    if (kind_ == "oscillating_flawed") {
      // Full-rate turns overshoot any bearing error just outside the deadband.
      const double b = s[layout_.goal_bearing_index()];
      if (b > params_.deadband) return find_action(actions_, 1.0, 1.0);
      if (b < -params_.deadband) return find_action(actions_, 1.0, -1.0);
      return find_action(actions_, 1.0, 0.0);
    }
    return terrain_speedy(s);
  }

  std::string kind() const override { return kind_; }
  json params_json() const override { return scripted_params_to_json(params_); }
  const StateLayout& layout() const override { return layout_; }

 private:
  ActionId potential_field(std::span<const double> s) const {
    const double b = s[layout_.goal_bearing_index()];
    double push = 0.0;
    bool near = false;
    for (int r = 0; r < layout_.occupancy_rows; ++r) {
      for (int c = 0; c < layout_.occupancy_columns; ++c) {
        const double v = s[layout_.occupancy_index(0, r, c)];
        const double ang = layout_.column_angle(c);
        const double front = std::cos(ang);
        if (v <= 0.0 || front <= 0.0) continue;
        if (r == 0 && v > 0.25) near = true;
        double away = ang > 1e-9 ? -1.0 : (ang < -1e-9 ? 1.0 : (b >= 0.0 ? 1.0 : -1.0));
        push += away * params_.repulsion * v * front / ((r + 1) * (r + 1));
      }
    }
    const double desired = b + push;
    const double angular = signed_level(desired);
    double linear = near ? 0.4 : 1.0;
    if (std::abs(desired) > 1.6) linear = 0.0;
    return find_action(actions_, linear, angular);
  }

  ActionId terrain_speedy(std::span<const double> s) const {
    const auto& rates = layout_.group(kAngularVelocityGroup);
    double vb = 0.0;
    double discount = 1.0;
    for (std::size_t k = 0; k + 1 < rates.size(); k += 2) {
      vb += discount * (std::abs(s[rates[k]]) + std::abs(s[rates[k + 1]]));
      discount *= params_.gamma;
    }
    const double b = s[layout_.goal_bearing_index()];
    if (vb > params_.vb_slow) return find_action(actions_, 0.4, b >= 0.0 ? 0.4 : -0.4);
    if (std::abs(b) < params_.deadband) return find_action(actions_, 1.0, 0.0);
    return find_action(actions_, 1.0, signed_level(b));
  }

  std::string kind_;
  StateLayout layout_;
  ScriptedParams params_;
  ActionCatalog actions_;
};

}  // namespace

ActionId find_action(const ActionCatalog& actions, double linear, double angular) {
  for (const auto& a : actions) {
    if (a.linear == linear && a.angular == angular) return a.id;
  }
  throw LookupError("catalog has no action with velocities (" + std::to_string(linear) + ", " +
                    std::to_string(angular) + ")");
}

json scripted_params_to_json(const ScriptedParams& p) {
  return {{"freeze_threshold", p.freeze_threshold},
          {"deadband", p.deadband},
          {"repulsion", p.repulsion},
          {"vb_slow", p.vb_slow},
          {"gamma", p.gamma}};
}

ScriptedParams scripted_params_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("scripted expert parameters must be an object");
  ScriptedParams p;
  for (const auto& [k, v] : doc.items()) {
    try {
      if (k == "freeze_threshold") p.freeze_threshold = v.get<double>();
      else if (k == "deadband") p.deadband = v.get<double>();
      else if (k == "repulsion") p.repulsion = v.get<double>();
      else if (k == "vb_slow") p.vb_slow = v.get<double>();
      else if (k == "gamma") p.gamma = v.get<double>();
      else throw ConfigError("unknown scripted expert key '" + k + "'");
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + k + "': " + e.what());
    }
  }
  return p;
}

std::shared_ptr<ExpertPolicy> scripted_expert(const std::string& kind, const StateLayout& layout,
                                              const ScriptedParams& params,
                                              const ActionCatalog& actions) {
  bool known = false;
  for (const auto& k : scripted_kinds()) known = known || k == kind;
  if (!known) throw ConfigError("unknown scripted expert kind '" + kind + "'");
  return std::make_shared<ScriptedExpert>(kind, layout, params, actions);
}

}  // namespace msviper::expert
