#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "detail.hpp"
#include "msviper/core/errors.hpp"
#include "msviper/core/random.hpp"

namespace msviper::envs {

namespace {

constexpr double kLinearStep = 0.25;   // metres per step at linear = 1
constexpr double kAngularStep = 1.0;   // radians per step at angular = 1
constexpr double kRobotRadius = 0.15;
constexpr double kGoalTolerance = 0.3;
constexpr double kRateGain = 1.0;
constexpr int kRateLags = 4;
constexpr int kPlacementTries = 200;

struct Disc {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;
};

/// Closed waypoint loop traversed at constant speed.
struct Loop {
  std::vector<std::array<double, 2>> points;
  double radius = 0.0;
  double speed = 0.0;

  Disc at(int t) const {
    std::vector<double> seg;
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& a = points[i];
      const auto& b = points[(i + 1) % points.size()];
      seg.push_back(std::hypot(b[0] - a[0], b[1] - a[1]));
      total += seg.back();
    }
    if (total <= 0.0) return {points[0][0], points[0][1], radius};
    double s = std::fmod(speed * t, total);
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (s <= seg[i] || i + 1 == points.size()) {
        const auto& a = points[i];
        const auto& b = points[(i + 1) % points.size()];
        const double u = seg[i] > 0.0 ? std::min(1.0, s / seg[i]) : 0.0;
        return {a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1]), radius};
      }
      s -= seg[i];
    }
    return {points[0][0], points[0][1], radius};
  }
};

/// Sum of two sinusoid products; amplitude = roughness.
struct HeightField {
  double amplitude = 0.0;
  double kx1 = 0.0, ky1 = 0.0, p1 = 0.0, q1 = 0.0;
  double kx2 = 0.0, ky2 = 0.0, p2 = 0.0;

  std::array<double, 2> gradient(double x, double y) const {
    const double a = kx1 * x + p1;
    const double b = ky1 * y + q1;
    const double c = kx2 * x + ky2 * y + p2;
    const double gx = amplitude * (kx1 * std::cos(a) * std::sin(b) + 0.5 * kx2 * std::cos(c));
    const double gy = amplitude * (ky1 * std::sin(a) * std::cos(b) + 0.5 * ky2 * std::cos(c));
    return {gx, gy};
  }
};

/// Unicycle robot among static and looping discs. The terrain variant adds a
/// height field and reports roll/pitch rates.
class ContinuousEnvironment final : public detail::EnvironmentBase {
 public:
  ContinuousEnvironment(const ScenarioSpec& spec, ActionCatalog actions)
      : EnvironmentBase(spec, std::move(actions)),
        geometry_(continuous_geometry(spec.full_layout)),
        terrain_(spec.env_kind == EnvKind::terrain) {
    if (spec_.width < 2.5 || spec_.height < 1.0) {
      throw PlacementError("continuous scenarios need at least 2.5 x 1.0 m");
    }
    if (terrain_) {
      rates_index_ = layout_.group(kAngularVelocityGroup);
    }
    build_world(derive_seed(spec_.rng_seed, 0));
  }

  StateVector reset(std::uint64_t episode) override {
    Rng rng(derive_seed(spec_.rng_seed, 1'000'003ULL + episode));
    if (spec_.per_episode_obstacles) build_world(derive_seed(spec_.rng_seed, 2'000'003ULL + episode));
    t_ = 0;
    auto place = [&](double x_lo, double x_hi) {
      for (int k = 0; k < kPlacementTries; ++k) {
        const double x = rng.uniform(x_lo, x_hi);
        const double y = rng.uniform(0.5, spec_.height - 0.5);
        if (clear(x, y, 0, kRobotRadius + 0.15)) return std::array<double, 2>{x, y};
      }
      throw PlacementError("no collision-free start/goal position found");
    };
    const auto start = place(0.5, 1.2);
    const auto goal = place(spec_.width - 1.2, spec_.width - 0.5);
    x_ = start[0];
    y_ = start[1];
    goal_x_ = goal[0];
    goal_y_ = goal[1];
    theta_ = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    done_ = false;
    started_ = true;
    prev_action_ = kStopAction;
    rates_.assign(2 * kRateLags, 0.0);
    history_.reset(snapshot());
    return state();
  }

  StepOutcome step(ActionId action) override {
    const ActionSpec& a = begin_step(action);
    const double before = goal_distance();
    const auto slope_before = slopes(x_, y_, theta_);

    StepInfo info;
    const double theta = detail::wrap_angle(theta_ + a.angular * kAngularStep);
    const double nx = x_ + a.linear * kLinearStep * std::cos(theta);
    const double ny = y_ + a.linear * kLinearStep * std::sin(theta);
    theta_ = theta;
    ++t_;
    if (clear(nx, ny, t_, kRobotRadius)) {
      x_ = nx;
      y_ = ny;
    } else {
      info.collision = true;
    }

    StepOutcome out;
    if (terrain_) {
      const auto slope_after = slopes(x_, y_, theta_);
      const double speed = std::abs(a.linear);
      out.signals.omega_p = kRateGain * speed * (slope_after[0] - slope_before[0]);
      out.signals.omega_r = kRateGain * speed * (slope_after[1] - slope_before[1]);
      for (int k = kRateLags - 1; k > 0; --k) {
        rates_[2 * k] = rates_[2 * (k - 1)];
        rates_[2 * k + 1] = rates_[2 * (k - 1) + 1];
      }
      rates_[0] = out.signals.omega_r;
      rates_[1] = out.signals.omega_p;
    }

    info.goal_reached = !info.collision && goal_distance() < kGoalTolerance;
    info.froze_this_step = a.linear == 0.0 && a.angular == 0.0 && !info.goal_reached;
    prev_action_ = action;
    done_ = info.collision || info.goal_reached || t_ >= spec_.horizon;
    history_.push(snapshot());

    out.info = info;
    out.done = done_;
    out.reward = shaped_reward(before, goal_distance(), info);
    out.next_state = state();
    return out;
  }

  double goal_distance() const override { return std::hypot(goal_x_ - x_, goal_y_ - y_); }

  StateVector state() const override {
    StateExtras extras;
    extras.goal_distance = goal_distance();
    extras.goal_bearing =
        detail::wrap_angle(std::atan2(goal_y_ - y_, goal_x_ - x_) - theta_);
    extras.prev_action = prev_action_;
    extras.extra.assign(static_cast<std::size_t>(layout_.extra_features), 0.0);
    const std::size_t base = layout_.extra_index(0);
    for (std::size_t k = 0; k < rates_index_.size() && k < rates_.size(); ++k) {
      extras.extra[rates_index_[k] - base] = rates_[k];
    }
    return history_.encode(layout_, extras);
  }

 private:
  void build_world(std::uint64_t map_seed) {
    Rng rng(map_seed);
    statics_.clear();
    loops_.clear();
    const double w = spec_.width;
    const double h = spec_.height;
    for (int k = 0; k < spec_.obstacle_count; ++k) {
      statics_.push_back({rng.uniform(0.35 * w, 0.65 * w), rng.uniform(0.3, h - 0.3),
                          spec_.obstacle_radius});
    }
    for (int k = 0; k < spec_.dynamic_obstacles; ++k) {
      Loop loop;
      loop.radius = spec_.obstacle_radius;
      loop.speed = spec_.obstacle_speed;
      for (int p = 0; p < 4; ++p) {
        loop.points.push_back({rng.uniform(0.3 * w, 0.7 * w), rng.uniform(0.3, h - 0.3)});
      }
      loops_.push_back(std::move(loop));
    }
    if (terrain_) {
      const double two_pi = 2.0 * std::numbers::pi;
      field_.amplitude = spec_.roughness;
      field_.kx1 = two_pi / rng.uniform(1.0, 2.0);
      field_.ky1 = two_pi / rng.uniform(1.0, 2.0);
      field_.p1 = rng.uniform(0.0, two_pi);
      field_.q1 = rng.uniform(0.0, two_pi);
      field_.kx2 = two_pi / rng.uniform(0.8, 1.6);
      field_.ky2 = two_pi / rng.uniform(0.8, 1.6);
      field_.p2 = rng.uniform(0.0, two_pi);
    }
  }

  std::vector<Disc> discs(int t) const {
    std::vector<Disc> all = statics_;
    for (const auto& loop : loops_) all.push_back(loop.at(t));
    return all;
  }

  bool clear(double x, double y, int t, double margin) const {
    if (x < margin || y < margin || x > spec_.width - margin || y > spec_.height - margin) {
      return false;
    }
    for (const auto& d : discs(t)) {
      if (std::hypot(x - d.x, y - d.y) < d.r + margin) return false;
    }
    return true;
  }

  /// Longitudinal and lateral slope of the terrain under the robot.
  std::array<double, 2> slopes(double x, double y, double theta) const {
    if (!terrain_) return {0.0, 0.0};
    const auto g = field_.gradient(x, y);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {g[0] * c + g[1] * s, -g[0] * s + g[1] * c};
  }

  double cast(double angle, const std::vector<Disc>& all) const {
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    double best = std::numeric_limits<double>::infinity();
    // Walls.
    if (dx > 1e-12) best = std::min(best, (spec_.width - x_) / dx);
    if (dx < -1e-12) best = std::min(best, -x_ / dx);
    if (dy > 1e-12) best = std::min(best, (spec_.height - y_) / dy);
    if (dy < -1e-12) best = std::min(best, -y_ / dy);
    for (const auto& d : all) {
      const double ox = x_ - d.x;
      const double oy = y_ - d.y;
      const double b = ox * dx + oy * dy;
      const double c = ox * ox + oy * oy - d.r * d.r;
      const double disc = b * b - c;
      if (disc < 0.0) continue;
      const double root = std::sqrt(disc);
      double t = -b - root;
      if (t < 0.0) t = -b + root;
      if (t >= 0.0) best = std::min(best, c <= 0.0 ? 0.0 : t);
    }
    return best;
  }

  Snapshot snapshot() const {
    const auto all = discs(t_);
    std::vector<double> ranges(static_cast<std::size_t>(geometry_.ray_count()));
    for (int r = 0; r < geometry_.ray_count(); ++r) {
      ranges[static_cast<std::size_t>(r)] = cast(theta_ + geometry_.ray_angle(r), all);
    }
    return occupancy_snapshot(geometry_, ranges);
  }

  OccupancyGeometry geometry_;
  bool terrain_;
  std::vector<std::size_t> rates_index_;
  std::vector<Disc> statics_;
  std::vector<Loop> loops_;
  HeightField field_;
  std::vector<double> rates_;
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
  double goal_x_ = 0.0;
  double goal_y_ = 0.0;
};

}  // namespace

std::unique_ptr<Environment> make_continuous_environment(const ScenarioSpec& spec,
                                                         ActionCatalog actions) {
  return std::make_unique<ContinuousEnvironment>(spec, std::move(actions));
}

}  // namespace msviper::envs
