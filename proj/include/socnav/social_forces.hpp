#pragma once

#include <optional>
#include <span>

#include "socnav/core.hpp"
#include "socnav/robot.hpp"

namespace socnav {

/// Social force parameters with a circular (isotropic) repulsion potential.
struct SocialForcesParams {
  double relaxation_time = 0.5;         // s
  std::optional<double> desired_speed;  // m/s, v_max when empty
  double pedestrian_strength = 5.0;     // m/s^2
  double pedestrian_range = 0.3;        // m
  double obstacle_strength = 5.0;       // m/s^2
  double obstacle_range = 0.3;          // m
  double obstacle_search = 2.0;         // m, radius searched for the nearest obstacle
};

/// Goal relaxation plus exponential repulsion from pedestrians and obstacle points.
Vec2 social_forces_acceleration(const AgentState& robot, std::span<const AgentState> pedestrians,
                                std::span<const Vec2> obstacle_points, Vec2 waypoint,
                                const SocialForcesParams& params, double v_max);

/// Integrates the acceleration over `dt` and emits the clamped velocity as a holonomic command.
HolonomicCommand social_forces_step(const AgentState& robot,
                                    std::span<const AgentState> pedestrians,
                                    std::span<const Vec2> obstacle_points, Vec2 waypoint,
                                    const SocialForcesParams& params, double v_max, double dt);

/// Closest point on any blocked cell within `range` of `p`, if one exists.
std::optional<Vec2> nearest_obstacle_point(const EnvironmentMap& env, Vec2 p, double range);

}  // namespace socnav
