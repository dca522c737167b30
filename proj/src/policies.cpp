#include "socnav/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace socnav {

Vec2 orca_velocity(const AgentState& robot, std::span<const AgentState> pedestrians,
                   const EnvironmentMap* env, Vec2 preferred, double v_max, double dt,
                   const OrcaParams& params) {
  std::vector<HalfPlane> planes;
  for (const auto& ped : pedestrians) {
    const double d = distance(robot.position(), ped.position());
    if (d > params.neighbor_range || d == 0.0) continue;
    planes.push_back(orca_halfplane(robot, ped, params.horizon, params.robot_responsibility, dt,
                                    params.safety_margin));
  }
  if (env != nullptr && params.max_obstacle_cells > 0) {
    const double res = env->resolution();
    const Vec2 p = robot.position();
    std::vector<std::pair<double, Vec2>> cells;
    const int c0 = env->col_of(p.x - params.obstacle_range);
    const int c1 = env->col_of(p.x + params.obstacle_range);
    const int r0 = env->row_of(p.y - params.obstacle_range);
    const int r1 = env->row_of(p.y + params.obstacle_range);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (env->is_free(c, r)) continue;
        const Vec2 center = env->cell_center(c, r);
        const double d = distance(p, center);
        if (d <= params.obstacle_range && d > 0.0) cells.push_back({d, center});
      }
    }
    std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
      return a.first < b.first || (a.first == b.first && (a.second.x < b.second.x ||
                                                          (a.second.x == b.second.x && a.second.y < b.second.y)));
    });
    if (cells.size() > static_cast<std::size_t>(params.max_obstacle_cells)) {
      cells.resize(static_cast<std::size_t>(params.max_obstacle_cells));
    }
    for (const auto& [d, center] : cells) {
      AgentState cell;
      cell.pose = Pose2D(center.x, center.y, 0.0);
      cell.radius = res * std::numbers::sqrt2 * 0.5;
      planes.push_back(orca_halfplane(robot, cell, params.obstacle_horizon, 1.0, dt, 0.02));
    }
  }
  return solve_velocity_lp(planes, preferred, v_max);
}

namespace {

Vec2 preferred_velocity(Vec2 from, Vec2 to, double speed) {
  const Vec2 d = to - from;
  const double len = norm(d);
  return len > 0.0 ? d / len * speed : Vec2{};
}

class SocialForcesPolicy final : public Policy {
 public:
  explicit SocialForcesPolicy(SocialForcesParams params) : params_(params) {}
  std::string name() const override { return "social-forces"; }
  ControlMode control_mode() const override { return ControlMode::kHolonomic; }
  void begin(const EpisodeBrief& brief, const EnvironmentMap& env) override {
    brief_ = brief;
    env_ = &env;
  }
  VelocityCommand act(const SimState& world) override {
    std::vector<Vec2> obstacles;
    if (auto q = nearest_obstacle_point(*env_, world.robot.position(), params_.obstacle_search)) {
      obstacles.push_back(*q);
    }
    return social_forces_step(world.robot, world.pedestrians, obstacles, brief_.goal, params_,
                              brief_.robot.v_max, 1.0 / brief_.tick_rate);
  }

 private:
  SocialForcesParams params_;
  EpisodeBrief brief_;
  const EnvironmentMap* env_ = nullptr;
};

class OrcaPolicy final : public Policy {
 public:
  OrcaPolicy(OrcaParams orca, MetaPlannerParams meta) : orca_(orca), meta_(meta) {}
  std::string name() const override { return "orca"; }
  ControlMode control_mode() const override { return ControlMode::kHolonomic; }
  void begin(const EpisodeBrief& brief, const EnvironmentMap& env) override {
    brief_ = brief;
    env_ = &env;
    tracker_.reset();
    planner_ = std::make_unique<MetaPlanner>(env, brief.goal, brief.robot, meta_);
    tracker_ = std::make_unique<WaypointTracker>(*planner_);
  }
  VelocityCommand act(const SimState& world) override {
    const Pose2D waypoint = tracker_->update(world.robot.pose);
    const Vec2 preferred =
        preferred_velocity(world.robot.position(), waypoint.position(), brief_.robot.v_max);
    return HolonomicCommand{orca_velocity(world.robot, world.pedestrians, env_, preferred,
                                          brief_.robot.v_max, 1.0 / brief_.tick_rate, orca_)};
  }

 private:
  OrcaParams orca_;
  MetaPlannerParams meta_;
  EpisodeBrief brief_;
  const EnvironmentMap* env_ = nullptr;
  std::unique_ptr<MetaPlanner> planner_;
  std::unique_ptr<WaypointTracker> tracker_;
};

class BaselinePolicy final : public Policy {
 public:
  BaselinePolicy(BaselineParams baseline, MetaPlannerParams meta)
      : baseline_(baseline), meta_(meta) {}
  std::string name() const override { return "baseline"; }
  ControlMode control_mode() const override { return ControlMode::kUnicycle; }
  void begin(const EpisodeBrief& brief, const EnvironmentMap& env) override {
    brief_ = brief;
    tracker_.reset();
    planner_ = std::make_unique<MetaPlanner>(env, brief.goal, brief.robot, meta_);
    tracker_ = std::make_unique<WaypointTracker>(*planner_);
  }
  VelocityCommand act(const SimState& world) override {
    const Pose2D waypoint = tracker_->update(world.robot.pose);
    return baseline_step(world.robot, waypoint.position(), brief_.robot, baseline_);
  }

 private:
  BaselineParams baseline_;
  MetaPlannerParams meta_;
  EpisodeBrief brief_;
  std::unique_ptr<MetaPlanner> planner_;
  std::unique_ptr<WaypointTracker> tracker_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(const std::string& name, const PlannerParams& params) {
  if (name == "social-forces") return std::make_unique<SocialForcesPolicy>(params.social_forces);
  if (name == "orca") return std::make_unique<OrcaPolicy>(params.orca, params.meta);
  if (name == "baseline") return std::make_unique<BaselinePolicy>(params.baseline, params.meta);
  throw UsageError("unknown planner '" + name + "'");
}

}  // namespace socnav
