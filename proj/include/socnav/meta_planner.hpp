#pragma once

#include <optional>
#include <vector>

#include "socnav/core.hpp"
#include "socnav/robot.hpp"

namespace socnav {

struct MetaPlannerParams {
  double horizon = 6.0;              // s; waypoints lie within v_max * horizon
  double replan_distance = 1.0;      // m; a new waypoint is requested inside this distance
  double preferred_clearance = 0.6;  // m; cells closer to obstacles than this are penalized
  double clearance_weight = 2.0;     // cost multiplier slope for the clearance penalty
  double hard_margin = 0.05;         // m added to the robot radius for line-of-sight checks
};

/// Sub-goal generator over the 8-connected grid of an environment. The cost-to-goal field is
/// built once per goal; each query follows the field from the robot and shortcuts along straight
/// segments that keep the required clearance.
class MetaPlanner {
 public:
  MetaPlanner(const EnvironmentMap& env, Vec2 goal, const RobotSpec& robot,
              MetaPlannerParams params = {});

  /// Next waypoint. Returns the current pose when no path to the goal exists.
  Pose2D waypoint(const Pose2D& robot) const;

  /// True when the straight segment keeps at least the hard clearance everywhere.
  bool line_of_sight(Vec2 a, Vec2 b) const;
  double clearance_at(int col, int row) const;
  double cost_to_goal(Vec2 p) const;
  const MetaPlannerParams& params() const { return params_; }

 private:
  std::vector<Vec2> grid_path(Vec2 from) const;

  const EnvironmentMap& env_;
  Vec2 goal_;
  double v_max_;
  double hard_clearance_;
  MetaPlannerParams params_;
  std::vector<double> clearance_;
  std::vector<double> cost_;
  std::vector<int> next_;  // index of the next cell toward the goal, -1 at the goal
};

/// Remembers the active waypoint and re-plans near it or when it drops out of sight.
class WaypointTracker {
 public:
  explicit WaypointTracker(const MetaPlanner& planner) : planner_(&planner) {}
  Pose2D update(const Pose2D& robot);

 private:
  const MetaPlanner* planner_;
  std::optional<Pose2D> current_;
};

struct BaselineParams {
  double heading_gain = 2.0;  // rad/s per rad of bearing error
};

/// Pure pursuit toward `waypoint` under unicycle limits; pedestrians are ignored.
UnicycleCommand baseline_step(const AgentState& robot, Vec2 waypoint, const RobotSpec& spec,
                              const BaselineParams& params = {});

}  // namespace socnav
