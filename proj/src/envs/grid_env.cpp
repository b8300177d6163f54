#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <string>

#include "detail.hpp"
#include "msviper/core/errors.hpp"
#include "msviper/core/random.hpp"

namespace msviper::envs {

namespace {

constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

/// Four-heading grid world. Any nonzero angular command rotates 90 degrees
/// in its direction; a positive linear command then advances one cell.
class GridEnvironment final : public detail::EnvironmentBase {
 public:
  GridEnvironment(const ScenarioSpec& spec, ActionCatalog actions)
      : EnvironmentBase(spec, std::move(actions)),
        geometry_(grid_geometry(spec.full_layout)),
        width_(static_cast<int>(spec.width)),
        height_(static_cast<int>(spec.height)) {
    if (!build_map(derive_seed(spec_.rng_seed, 0))) {
      throw PlacementError("no free start cell is connected to the goal");
    }
  }

  StateVector reset(std::uint64_t episode) override {
    Rng rng(derive_seed(spec_.rng_seed, 1'000'003ULL + episode));
    if (spec_.per_episode_obstacles) {
      // Redraw until the goal is reachable from somewhere.
      const std::uint64_t base = derive_seed(spec_.rng_seed, 2'000'003ULL + episode);
      bool placed = false;
      for (std::uint64_t attempt = 0; attempt < 64 && !placed; ++attempt) {
        placed = build_map(derive_seed(base, attempt));
      }
      if (!placed) throw PlacementError("no obstacle layout leaves the goal reachable");
    }
    const auto& cell = reachable_[rng.below(reachable_.size())];
    x_ = cell.first;
    y_ = cell.second;
    heading_ = static_cast<int>(rng.below(4));
    t_ = 0;
    done_ = false;
    started_ = true;
    prev_action_ = kStopAction;
    history_.reset(snapshot());
    return state();
  }

  StepOutcome step(ActionId action) override {
    const ActionSpec& a = begin_step(action);
    const double before = goal_distance();
    StepInfo info;
    if (a.angular > 0.0) heading_ = (heading_ + 1) % 4;
    if (a.angular < 0.0) heading_ = (heading_ + 3) % 4;
    if (a.linear > 0.0) {
      const int nx = x_ + kDx[heading_];
      const int ny = y_ + kDy[heading_];
      if (blocked(nx, ny)) {
        info.collision = true;
      } else {
        x_ = nx;
        y_ = ny;
      }
    }
    ++t_;
    info.goal_reached = x_ == goal_x_ && y_ == goal_y_;
    info.froze_this_step = a.linear == 0.0 && a.angular == 0.0 && !info.goal_reached;
    prev_action_ = action;
    done_ = info.collision || info.goal_reached || t_ >= spec_.horizon;
    history_.push(snapshot());

    StepOutcome out;
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
    const double world = std::atan2(goal_y_ - y_, goal_x_ - x_);
    extras.goal_bearing =
        extras.goal_distance == 0.0 ? 0.0 : detail::wrap_angle(world - heading_angle());
    extras.prev_action = prev_action_;
    extras.extra.assign(static_cast<std::size_t>(layout_.extra_features), 0.0);
    return history_.encode(layout_, extras);
  }

 private:
  double heading_angle() const { return heading_ * std::numbers::pi / 2.0; }

  bool blocked(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return true;
    return obstacle_[static_cast<std::size_t>(y * width_ + x)] != 0;
  }

  /// The goal always comes from the scenario seed; obstacles from `map_seed`
  /// (equal to the goal stream unless obstacles are redrawn per episode).
  bool build_map(std::uint64_t map_seed) {
    const int cells = width_ * height_;
    int count = spec_.obstacle_count;
    if (spec_.obstacle_density >= 0.0) {
      count = static_cast<int>(std::lround(spec_.obstacle_density * cells));
    }
    if (count > cells - 2) {
      throw PlacementError("cannot place " + std::to_string(count) + " obstacles plus a start and goal on a " +
                           std::to_string(width_) + "x" + std::to_string(height_) + " grid");
    }
    Rng goal_rng(derive_seed(spec_.rng_seed, 0));
    const int goal = static_cast<int>(goal_rng.below(static_cast<std::uint64_t>(cells)));
    goal_x_ = goal % width_;
    goal_y_ = goal / width_;
    Rng shuffle_rng(map_seed);
    Rng& rng = map_seed == derive_seed(spec_.rng_seed, 0) ? goal_rng : shuffle_rng;

    std::vector<int> free;
    for (int c = 0; c < cells; ++c) {
      if (c != goal) free.push_back(c);
    }
    for (std::size_t i = free.size(); i > 1; --i) {
      std::swap(free[i - 1], free[rng.below(i)]);
    }
    obstacle_.assign(static_cast<std::size_t>(cells), 0);
    reachable_.clear();
    for (int k = 0; k < count; ++k) obstacle_[static_cast<std::size_t>(free[k])] = 1;

    // Starts are restricted to cells connected to the goal.
    std::vector<char> seen(static_cast<std::size_t>(cells), 0);
    std::deque<int> queue{goal};
    seen[static_cast<std::size_t>(goal)] = 1;
    while (!queue.empty()) {
      const int c = queue.front();
      queue.pop_front();
      const int cx = c % width_;
      const int cy = c / width_;
      if (c != goal) reachable_.emplace_back(cx, cy);
      for (int h = 0; h < 4; ++h) {
        const int nx = cx + kDx[h];
        const int ny = cy + kDy[h];
        if (blocked(nx, ny)) continue;
        const int n = ny * width_ + nx;
        if (seen[static_cast<std::size_t>(n)] == 0) {
          seen[static_cast<std::size_t>(n)] = 1;
          queue.push_back(n);
        }
      }
    }
    std::sort(reachable_.begin(), reachable_.end());
    return !reachable_.empty();
  }

  /// Grid traversal from the cell centre; distance to the first blocked cell.
  double cast(double angle) const {
    const double px = x_ + 0.5;
    const double py = y_ + 0.5;
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr double eps = 1e-12;
    int ix = x_;
    int iy = y_;
    const int sx = dx > eps ? 1 : (dx < -eps ? -1 : 0);
    const int sy = dy > eps ? 1 : (dy < -eps ? -1 : 0);
    double tx = sx > 0 ? (ix + 1 - px) / dx : (sx < 0 ? (px - ix) / -dx : inf);
    double ty = sy > 0 ? (iy + 1 - py) / dy : (sy < 0 ? (py - iy) / -dy : inf);
    const double ddx = sx != 0 ? 1.0 / std::abs(dx) : inf;
    const double ddy = sy != 0 ? 1.0 / std::abs(dy) : inf;
    const double range = geometry_.max_range();
    while (true) {
      double t;
      if (tx <= ty) {
        t = tx;
        ix += sx;
        tx += ddx;
      } else {
        t = ty;
        iy += sy;
        ty += ddy;
      }
      if (t >= range) return inf;
      if (blocked(ix, iy)) return t;
    }
  }

  Snapshot snapshot() const {
    std::vector<double> ranges(static_cast<std::size_t>(geometry_.ray_count()));
    for (int r = 0; r < geometry_.ray_count(); ++r) {
      ranges[static_cast<std::size_t>(r)] = cast(heading_angle() + geometry_.ray_angle(r));
    }
    return occupancy_snapshot(geometry_, ranges);
  }

  OccupancyGeometry geometry_;
  int width_;
  int height_;
  std::vector<char> obstacle_;
  std::vector<std::pair<int, int>> reachable_;
  int goal_x_ = 0;
  int goal_y_ = 0;
  int x_ = 0;
  int y_ = 0;
  int heading_ = 0;
};

}  // namespace

std::unique_ptr<Environment> make_grid_environment(const ScenarioSpec& spec, ActionCatalog actions) {
  return std::make_unique<GridEnvironment>(spec, std::move(actions));
}

}  // namespace msviper::envs
