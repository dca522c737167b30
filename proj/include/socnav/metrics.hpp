#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socnav/core.hpp"
#include "socnav/sim.hpp"

namespace socnav {

inline constexpr double kDistanceSaturation = 10.0;  // meters
inline constexpr double kTtcSaturation = 10.0;       // seconds

double path_length(std::span<const Vec2> positions);
/// Straight-line start-goal distance over path length. Throws UsageError for a zero-length path.
double path_length_ratio(Vec2 start, Vec2 goal, double path_length);
/// Remaining over initial goal distance. Throws UsageError when start is at the goal.
double goal_traversal_ratio(Vec2 start, Vec2 end, Vec2 goal);
/// Mean absolute heading-to-goal angle over poses outside the goal radius.
/// Throws UsageError when every pose is inside it.
double path_irregularity(std::span<const Pose2D> poses, Vec2 goal, double goal_radius);

struct KinematicStats {
  double average_speed = 0.0;         // m/s
  double energy = 0.0;                // J, unit mass, sum of v^2 dt
  double average_acceleration = 0.0;  // m/s^2, mean magnitude
  double average_jerk = 0.0;          // m/s^3, mean magnitude
};

/// Finite-difference motion statistics; needs at least 4 positions.
KinematicStats kinematic_stats(std::span<const Vec2> positions, double dt);

/// Surface distance to the nearest pedestrian, saturated at 10 m (negative while overlapping).
double closest_pedestrian_distance(const AgentState& robot, std::span<const AgentState> pedestrians);
/// Time until the linearly extrapolated discs first touch, saturated at 10 s; 0 if overlapping.
double time_to_collision(const AgentState& robot, const AgentState& pedestrian);
double time_to_collision(const AgentState& robot, std::span<const AgentState> pedestrians);

struct EpisodeMetrics {
  std::string episode;
  TerminationKind termination = TerminationKind::kTimeout;
  bool success = false;
  bool transport_failure = false;
  int pedestrian_collisions = 0;
  std::int64_t ticks = 0;
  double path_length = 0.0;
  std::optional<double> path_length_ratio;
  std::optional<double> goal_traversal_ratio;  // incomplete episodes only
  std::optional<double> path_irregularity;
  double traversal_time = 0.0;
  std::optional<double> average_speed;
  std::optional<double> energy;
  std::optional<double> average_acceleration;
  std::optional<double> average_jerk;
  std::vector<double> cpd_series;
  std::vector<double> ttc_series;
  double cpd_mean = kDistanceSaturation;
  double ttc_mean = kTtcSaturation;
  double planning_wait_mean = 0.0;  // seconds per decided step
  double planning_wait_total = 0.0;

  friend bool operator==(const EpisodeMetrics&, const EpisodeMetrics&) = default;
};

EpisodeMetrics compute_episode_metrics(const EpisodeLog& log);

struct FailureTuple {
  int timeout = 0;
  int pedestrian_collision = 0;
  int environment_collision = 0;

  /// "T/PC/EC"
  std::string str() const;
  friend bool operator==(const FailureTuple&, const FailureTuple&) = default;
};

struct MetaReport {
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
  FailureTuple failures;
  int total_pedestrian_collisions = 0;
  double average_planning_wait = 0.0;  // seconds per step over all episodes

  friend bool operator==(const MetaReport&, const MetaReport&) = default;
};

/// Failure categories are exclusive: a Timeout or Environment Collision episode is counted under
/// that kind even if it also had pedestrian collisions; Pedestrian Collision counts completed
/// episodes with at least one pedestrian collision.
MetaReport aggregate_meta(std::span<const EpisodeLog> logs);

}  // namespace socnav
