#pragma once

#include <memory>
#include <optional>
#include <string>

#include "socnav/core.hpp"
#include "socnav/meta_planner.hpp"
#include "socnav/orca.hpp"
#include "socnav/robot.hpp"
#include "socnav/sim.hpp"
#include "socnav/social_forces.hpp"

namespace socnav {

/// What a client knows about the episode it is about to play.
struct EpisodeBrief {
  std::string name;
  Pose2D start;
  Vec2 goal;
  double goal_radius = 0.3;
  double time_budget = 60.0;
  double tick_rate = 25.0;
  RobotSpec robot;
};

struct PlannerParams {
  SocialForcesParams social_forces;
  OrcaParams orca;
  MetaPlannerParams meta;
  BaselineParams baseline;
};

/// A navigation algorithm driven one world state at a time.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual ControlMode control_mode() const = 0;
  /// `env` stays alive until the next begin().
  virtual void begin(const EpisodeBrief& brief, const EnvironmentMap& env) = 0;
  virtual VelocityCommand act(const SimState& world) = 0;
};

/// "social-forces", "orca" or "baseline".
std::unique_ptr<Policy> make_policy(const std::string& name, const PlannerParams& params = {});

/// ORCA velocity for one tick: half-planes from pedestrians in range and nearby map cells.
Vec2 orca_velocity(const AgentState& robot, std::span<const AgentState> pedestrians,
                   const EnvironmentMap* env, Vec2 preferred, double v_max, double dt,
                   const OrcaParams& params);

}  // namespace socnav
