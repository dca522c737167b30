#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "socnav/core.hpp"
#include "socnav/ingest.hpp"
#include "socnav/policies.hpp"
#include "socnav/sim.hpp"

namespace socnav::fixture {

/// Walled rectangle; `wall` blocked cells on every side.
inline EnvironmentMap open_room(int width, int height, double res = 0.1, int wall = 0,
                                std::string name = "room") {
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(width) * height, 1);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (c < wall || r < wall || c >= width - wall || r >= height - wall) {
        cells[static_cast<std::size_t>(r) * width + c] = 0;
      }
    }
  }
  return EnvironmentMap(std::move(name), width, height, res, {0.0, 0.0}, std::move(cells));
}

/// Track moving at constant velocity from `p0`, present on ticks [first, last].
inline PedestrianTrack straight_track(AgentId id, Vec2 p0, Vec2 v, std::int64_t first, std::int64_t last,
                                      double rate) {
  PedestrianTrack t;
  t.id = id;
  t.first_tick = first;
  t.entry_time = first / rate;
  t.exit_time = last / rate;
  const double heading = std::atan2(v.y, v.x);
  for (std::int64_t k = first; k <= last; ++k) {
    t.positions.push_back(p0 + v * (static_cast<double>(k - first) / rate));
    t.velocities.push_back(v);
    t.headings.push_back(heading);
  }
  return t;
}

inline Episode make_episode(std::string name, std::string env, Pose2D start, Vec2 goal,
                            std::vector<PedestrianTrack> tracks = {}, double budget = 60.0,
                            double rate = 25.0) {
  Episode e;
  e.name = std::move(name);
  e.environment = std::move(env);
  e.robot_start = start;
  e.goal = goal;
  e.time_budget = budget;
  e.tick_rate = rate;
  e.tracks = std::move(tracks);
  return e;
}

/// Holonomic client heading straight for the goal at full speed.
class GoalSeeker final : public SyncClient {
 public:
  GoalSeeker(Vec2 goal, double speed) : goal_(goal), speed_(speed) {}
  VelocityCommand decide(const SimState& s) override {
    const Vec2 d = goal_ - s.robot.position();
    const double n = norm(d);
    return HolonomicCommand{n > 0.0 ? d / n * speed_ : Vec2{}};
  }

 private:
  Vec2 goal_;
  double speed_;
};

class ConstantClient final : public SyncClient {
 public:
  explicit ConstantClient(VelocityCommand c) : c_(c) {}
  VelocityCommand decide(const SimState&) override { return c_; }

 private:
  VelocityCommand c_;
};

/// Runs a bundled policy in-process.
class PolicyClient final : public SyncClient {
 public:
  PolicyClient(Policy& policy, const Episode& ep, const EnvironmentMap& env, const RobotSpec& robot)
      : policy_(policy) {
    policy_.begin({ep.name, ep.robot_start, ep.goal, ep.goal_radius, ep.time_budget, ep.tick_rate, robot}, env);
  }
  VelocityCommand decide(const SimState& s) override { return policy_.act(s); }

 private:
  Policy& policy_;
};

inline std::filesystem::path source_dir() { return SOCNAV_SOURCE_DIR; }

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("socnav_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace socnav::fixture
