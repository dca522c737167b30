#include "socnav/meta_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace socnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBlockedFactor = 1000.0;

}  // namespace

MetaPlanner::MetaPlanner(const EnvironmentMap& env, Vec2 goal, const RobotSpec& robot,
                         MetaPlannerParams params)
    : env_(env),
      goal_(goal),
      v_max_(robot.v_max),
      hard_clearance_(robot.radius + params.hard_margin),
      params_(params) {
  const std::size_t n = static_cast<std::size_t>(env.width()) * env.height();
  clearance_.assign(n, 0.0);
  const double search = hard_clearance_ + params_.preferred_clearance;
  for (int r = 0; r < env.height(); ++r) {
    for (int c = 0; c < env.width(); ++c) {
      if (env.is_free(c, r)) clearance_[env.index(c, r)] = env.clearance(env.cell_center(c, r), search);
    }
  }
  auto factor = [&](std::size_t i) {
    const double clear = clearance_[i];
    if (clear < hard_clearance_) return kBlockedFactor;
    const double penalty = std::max(0.0, 1.0 - (clear - hard_clearance_) / params_.preferred_clearance);
    return 1.0 + params_.clearance_weight * penalty;
  };

  cost_.assign(n, kInf);
  next_.assign(n, -1);
  const int gc = env.col_of(goal.x);
  const int gr = env.row_of(goal.y);
  if (!env.is_free(gc, gr)) return;

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  cost_[env.index(gc, gr)] = 0.0;
  open.push({0.0, env.index(gc, gr)});
  const double res = env.resolution();
  while (!open.empty()) {
    auto [d, i] = open.top();
    open.pop();
    if (d > cost_[i]) continue;
    const int c = static_cast<int>(i % static_cast<std::size_t>(env.width()));
    const int r = static_cast<int>(i / static_cast<std::size_t>(env.width()));
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dc == 0 && dr == 0) continue;
        const int nc = c + dc;
        const int nr = r + dr;
        if (!env.is_free(nc, nr)) continue;
        // No corner cutting past blocked cells.
        if (dc != 0 && dr != 0 && (!env.is_free(c + dc, r) || !env.is_free(c, r + dr))) continue;
        const std::size_t j = env.index(nc, nr);
        const double step = (dc != 0 && dr != 0 ? std::numbers::sqrt2 : 1.0) * res;
        const double nd = d + step * 0.5 * (factor(i) + factor(j));
        if (nd < cost_[j]) {
          cost_[j] = nd;
          next_[j] = static_cast<int>(i);
          open.push({nd, j});
        }
      }
    }
  }
}

double MetaPlanner::clearance_at(int col, int row) const {
  return env_.in_bounds(col, row) ? clearance_[env_.index(col, row)] : 0.0;
}

double MetaPlanner::cost_to_goal(Vec2 p) const {
  const int c = env_.col_of(p.x);
  const int r = env_.row_of(p.y);
  return env_.in_bounds(c, r) ? cost_[env_.index(c, r)] : kInf;
}

bool MetaPlanner::line_of_sight(Vec2 a, Vec2 b) const {
  const double len = distance(a, b);
  const double step = env_.resolution() * 0.25;
  const int n = static_cast<int>(std::ceil(len / step));
  for (int i = 0; i <= n; ++i) {
    const Vec2 p = n == 0 ? a : a + (b - a) * (static_cast<double>(i) / n);
    if (env_.disc_hits_obstacle(p, hard_clearance_)) return false;
  }
  return true;
}

std::vector<Vec2> MetaPlanner::grid_path(Vec2 from) const {
  std::vector<Vec2> path;
  const int c = env_.col_of(from.x);
  const int r = env_.row_of(from.y);
  if (!env_.is_free(c, r) || cost_[env_.index(c, r)] == kInf) return path;
  int i = static_cast<int>(env_.index(c, r));
  while (i >= 0) {
    const int cc = i % env_.width();
    const int rr = i / env_.width();
    path.push_back(env_.cell_center(cc, rr));
    i = next_[static_cast<std::size_t>(i)];
  }
  path.push_back(goal_);
  return path;
}

Pose2D MetaPlanner::waypoint(const Pose2D& robot) const {
  const Vec2 p = robot.position();
  const double reach = v_max_ * params_.horizon;
  auto toward = [&](Vec2 target) {
    const Vec2 dir = target - p;
    const double len = norm(dir);
    if (len == 0.0) return Pose2D(p.x, p.y, robot.heading);
    const Vec2 capped = len > reach ? p + dir * (reach / len) : target;
    return Pose2D(capped.x, capped.y, std::atan2(dir.y, dir.x));
  };

  if (distance(p, goal_) <= reach && line_of_sight(p, goal_)) return toward(goal_);
  const auto path = grid_path(p);
  if (path.empty()) return robot;

  // Farthest path point visible along a straight segment; the waypoint is capped along it.
  std::size_t best = std::min<std::size_t>(2, path.size() - 1);
  for (std::size_t j = 0; j < path.size(); ++j) {
    if (!line_of_sight(p, path[j])) break;
    best = std::max(best, j);
  }
  return toward(path[best]);
}

Pose2D WaypointTracker::update(const Pose2D& robot) {
  const bool stale =
      !current_ ||
      distance(robot.position(), current_->position()) <= planner_->params().replan_distance ||
      !planner_->line_of_sight(robot.position(), current_->position());
  if (stale) current_ = planner_->waypoint(robot);
  return *current_;
}

UnicycleCommand baseline_step(const AgentState& robot, Vec2 waypoint, const RobotSpec& spec,
                              const BaselineParams& params) {
  const Vec2 to = waypoint - robot.position();
  if (norm(to) == 0.0) return {};
  const double error = normalize_angle(std::atan2(to.y, to.x) - robot.pose.heading);
  const double omega = std::clamp(params.heading_gain * error, -spec.omega_max, spec.omega_max);
  const double v = spec.v_max * std::max(0.0, std::cos(error));
  return {v, omega};
}

}  // namespace socnav
