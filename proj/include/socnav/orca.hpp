#pragma once

#include <span>
#include <vector>

#include "socnav/core.hpp"

namespace socnav {

/// Velocity constraint: v is permitted iff dot(v - point, normal) >= 0.
struct HalfPlane {
  Vec2 point;
  Vec2 normal;  // unit length

  /// Signed violation: positive when `v` lies outside the permitted side.
  double violation(Vec2 v) const { return -dot(v - point, normal); }
};

struct OrcaParams {
  double horizon = 2.0;                    // s
  double neighbor_range = 10.0;            // m
  double robot_responsibility = 1.0;       // share of the avoidance taken by the robot
  double pedestrian_responsibility = 0.0;  // replayed pedestrians never react
  double safety_margin = 0.05;             // m added to the combined radius
  double obstacle_horizon = 1.0;           // s, for static map cells
  double obstacle_range = 1.0;             // m
  int max_obstacle_cells = 12;
};

/// ORCA constraint induced on `robot` by `other` over `horizon`, with the robot taking
/// `responsibility` of the required change. `dt` resolves already-overlapping pairs within one
/// tick. Throws UsageError for coincident centers.
HalfPlane orca_halfplane(const AgentState& robot, const AgentState& other, double horizon,
                         double responsibility, double dt, double extra_radius = 0.0);

/// Velocity closest to `preferred` inside every half-plane and the speed disc; when infeasible,
/// the velocity in the disc minimizing the largest violation.
Vec2 solve_velocity_lp(std::span<const HalfPlane> planes, Vec2 preferred, double v_max);

/// True when `v` satisfies every plane within `tolerance`.
bool satisfies_all(std::span<const HalfPlane> planes, Vec2 v, double tolerance);

}  // namespace socnav
