#include "socnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace socnav {

double path_length(std::span<const Vec2> positions) {
  double total = 0.0;
  for (std::size_t i = 1; i < positions.size(); ++i) total += distance(positions[i - 1], positions[i]);
  return total;
}

double path_length_ratio(Vec2 start, Vec2 goal, double length) {
  if (!(length > 0.0)) throw UsageError("path length ratio undefined for a zero-length path");
  return distance(start, goal) / length;
}

double goal_traversal_ratio(Vec2 start, Vec2 end, Vec2 goal) {
  const double initial = distance(start, goal);
  if (initial == 0.0) throw UsageError("goal traversal ratio undefined when starting at the goal");
  return distance(end, goal) / initial;
}

double path_irregularity(std::span<const Pose2D> poses, Vec2 goal, double goal_radius) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& pose : poses) {
    if (distance(pose.position(), goal) <= goal_radius) continue;
    sum += bearing_error(pose, goal);
    ++n;
  }
  if (n == 0) throw UsageError("path irregularity undefined: every pose is within the goal radius");
  return sum / static_cast<double>(n);
}

KinematicStats kinematic_stats(std::span<const Vec2> positions, double dt) {
  if (!(dt > 0.0)) throw UsageError("dt must be positive");
  if (positions.size() < 4) throw UsageError("kinematic statistics need at least 4 positions");
  std::vector<Vec2> vel(positions.size() - 1);
  for (std::size_t i = 0; i < vel.size(); ++i) vel[i] = (positions[i + 1] - positions[i]) / dt;
  std::vector<Vec2> acc(vel.size() - 1);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = (vel[i + 1] - vel[i]) / dt;
  std::vector<Vec2> jerk(acc.size() - 1);
  for (std::size_t i = 0; i < jerk.size(); ++i) jerk[i] = (acc[i + 1] - acc[i]) / dt;

  auto mean_norm = [](const std::vector<Vec2>& v) {
    double s = 0.0;
    for (const auto& x : v) s += norm(x);
    return s / static_cast<double>(v.size());
  };
  KinematicStats out;
  out.average_speed = mean_norm(vel);
  for (const auto& v : vel) out.energy += norm_sq(v) * dt;
  out.average_acceleration = mean_norm(acc);
  out.average_jerk = mean_norm(jerk);
  return out;
}

double closest_pedestrian_distance(const AgentState& robot,
                                   std::span<const AgentState> pedestrians) {
  double best = kDistanceSaturation;
  for (const auto& p : pedestrians) {
    best = std::min(best, distance(robot.position(), p.position()) - robot.radius - p.radius);
  }
  return best;
}

double time_to_collision(const AgentState& robot, const AgentState& pedestrian) {
  const Vec2 p = pedestrian.position() - robot.position();
  const Vec2 v = pedestrian.velocity - robot.velocity;
  const double r = robot.radius + pedestrian.radius;
  const double c = norm_sq(p) - r * r;
  if (c <= 0.0) return 0.0;
  const double a = norm_sq(v);
  const double b = 2.0 * dot(p, v);
  if (a == 0.0) return kTtcSaturation;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return kTtcSaturation;
  // With c > 0 both roots share a sign; only approaching pairs (b < 0) have a future contact.
  if (b >= 0.0) return kTtcSaturation;
  const double t = (-b - std::sqrt(disc)) / (2.0 * a);
  return std::min(t, kTtcSaturation);
}

double time_to_collision(const AgentState& robot, std::span<const AgentState> pedestrians) {
  double best = kTtcSaturation;
  for (const auto& p : pedestrians) best = std::min(best, time_to_collision(robot, p));
  return best;
}

EpisodeMetrics compute_episode_metrics(const EpisodeLog& log) {
  EpisodeMetrics m;
  m.episode = log.episode;
  m.termination = log.termination.kind;
  m.success = log.termination.success;
  m.transport_failure = log.transport_failure;
  m.pedestrian_collisions = log.termination.pedestrian_collisions;
  m.ticks = log.records.empty() ? 0 : log.records.back().state.tick;
  m.traversal_time = static_cast<double>(m.ticks) / log.tick_rate;

  std::vector<Vec2> positions;
  std::vector<Pose2D> poses;
  positions.reserve(log.records.size());
  poses.reserve(log.records.size());
  for (const auto& r : log.records) {
    positions.push_back(r.state.robot.position());
    poses.push_back(r.state.robot.pose);
  }
  m.path_length = path_length(positions);
  const Vec2 start = log.start.position();
  if (m.path_length > 0.0) m.path_length_ratio = path_length_ratio(start, log.goal, m.path_length);
  if (log.termination.kind != TerminationKind::kCompletion && !positions.empty() &&
      distance(start, log.goal) > 0.0) {
    m.goal_traversal_ratio = goal_traversal_ratio(start, positions.back(), log.goal);
  }
  const bool any_outside = std::any_of(poses.begin(), poses.end(), [&](const Pose2D& p) {
    return distance(p.position(), log.goal) > log.goal_radius;
  });
  if (any_outside) m.path_irregularity = path_irregularity(poses, log.goal, log.goal_radius);
  if (positions.size() >= 4) {
    const auto k = kinematic_stats(positions, log.dt());
    m.average_speed = k.average_speed;
    m.energy = k.energy;
    m.average_acceleration = k.average_acceleration;
    m.average_jerk = k.average_jerk;
  }

  for (const auto& r : log.records) {
    m.cpd_series.push_back(closest_pedestrian_distance(r.state.robot, r.state.pedestrians));
    m.ttc_series.push_back(time_to_collision(r.state.robot, r.state.pedestrians));
  }
  if (!m.cpd_series.empty()) {
    m.cpd_mean = std::accumulate(m.cpd_series.begin(), m.cpd_series.end(), 0.0) /
                 static_cast<double>(m.cpd_series.size());
    m.ttc_mean = std::accumulate(m.ttc_series.begin(), m.ttc_series.end(), 0.0) /
                 static_cast<double>(m.ttc_series.size());
  }

  double wait = 0.0;
  std::size_t steps = 0;
  for (const auto& r : log.records) {
    if (!r.command) continue;
    wait += r.planning_wait;
    ++steps;
  }
  m.planning_wait_mean = steps ? wait / static_cast<double>(steps) : 0.0;
  m.planning_wait_total = wait;
  return m;
}

std::string FailureTuple::str() const {
  return std::to_string(timeout) + "/" + std::to_string(pedestrian_collision) + "/" +
         std::to_string(environment_collision);
}

MetaReport aggregate_meta(std::span<const EpisodeLog> logs) {
  if (logs.empty()) throw UsageError("meta statistics need at least one episode log");
  MetaReport r;
  double wait = 0.0;
  std::size_t steps = 0;
  for (const auto& log : logs) {
    ++r.episodes;
    const auto& t = log.termination;
    r.total_pedestrian_collisions += t.pedestrian_collisions;
    switch (t.kind) {
      case TerminationKind::kTimeout:
        ++r.failures.timeout;
        break;
      case TerminationKind::kEnvironmentCollision:
        ++r.failures.environment_collision;
        break;
      case TerminationKind::kCompletion:
        if (t.pedestrian_collisions > 0) {
          ++r.failures.pedestrian_collision;
        } else {
          ++r.successes;
        }
        break;
    }
    for (const auto& rec : log.records) {
      if (!rec.command) continue;
      wait += rec.planning_wait;
      ++steps;
    }
  }
  r.success_rate = static_cast<double>(r.successes) / static_cast<double>(r.episodes);
  r.average_planning_wait = steps ? wait / static_cast<double>(steps) : 0.0;
  return r;
}

}  // namespace socnav
