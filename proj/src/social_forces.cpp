#include "socnav/social_forces.hpp"

#include <algorithm>
#include <cmath>

namespace socnav {

Vec2 social_forces_acceleration(const AgentState& robot, std::span<const AgentState> pedestrians,
                                std::span<const Vec2> obstacle_points, Vec2 waypoint,
                                const SocialForcesParams& params, double v_max) {
  const double v0 = params.desired_speed.value_or(v_max);
  Vec2 desired;
  const Vec2 to_goal = waypoint - robot.position();
  if (norm(to_goal) > 0.0) desired = to_goal / norm(to_goal) * v0;
  Vec2 accel = (desired - robot.velocity) / params.relaxation_time;

  for (const auto& ped : pedestrians) {
    const Vec2 away = robot.position() - ped.position();
    const double d = norm(away);
    if (d == 0.0) continue;
    const double r_sum = robot.radius + ped.radius;
    accel += away / d * (params.pedestrian_strength * std::exp((r_sum - d) / params.pedestrian_range));
  }
  for (const auto& q : obstacle_points) {
    const Vec2 away = robot.position() - q;
    const double d = norm(away);
    if (d == 0.0) continue;
    accel += away / d *
             (params.obstacle_strength * std::exp((robot.radius - d) / params.obstacle_range));
  }
  return accel;
}

HolonomicCommand social_forces_step(const AgentState& robot,
                                    std::span<const AgentState> pedestrians,
                                    std::span<const Vec2> obstacle_points, Vec2 waypoint,
                                    const SocialForcesParams& params, double v_max, double dt) {
  if (!(dt > 0.0)) throw UsageError("dt must be positive");
  const Vec2 accel =
      social_forces_acceleration(robot, pedestrians, obstacle_points, waypoint, params, v_max);
  Vec2 v = robot.velocity + accel * dt;
  if (norm(v) > v_max) v = v * (v_max / norm(v));
  return {v};
}

std::optional<Vec2> nearest_obstacle_point(const EnvironmentMap& env, Vec2 p, double range) {
  const double res = env.resolution();
  const int c0 = env.col_of(p.x - range);
  const int c1 = env.col_of(p.x + range);
  const int r0 = env.row_of(p.y - range);
  const int r1 = env.row_of(p.y + range);
  std::optional<Vec2> best;
  double best_d = range;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (env.is_free(c, r)) continue;
      const double x0 = env.origin().x + c * res;
      const double y0 = env.origin().y + r * res;
      const Vec2 q{std::clamp(p.x, x0, x0 + res), std::clamp(p.y, y0, y0 + res)};
      const double d = distance(p, q);
      if (d <= best_d) {
        best_d = d;
        best = q;
      }
    }
  }
  return best;
}

}  // namespace socnav
