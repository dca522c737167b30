#include "socnav/robot.hpp"

#include <algorithm>
#include <cmath>

namespace socnav {

std::string to_string(ControlMode mode) {
  return mode == ControlMode::kUnicycle ? "unicycle" : "holonomic";
}

ControlMode control_mode_from_string(const std::string& s) {
  if (s == "unicycle") return ControlMode::kUnicycle;
  if (s == "holonomic") return ControlMode::kHolonomic;
  throw UsageError("unknown control mode '" + s + "'");
}

VelocityCommand zero_command(ControlMode mode) {
  if (mode == ControlMode::kUnicycle) return UnicycleCommand{};
  return HolonomicCommand{};
}

AgentState step_unicycle(const AgentState& state, UnicycleCommand cmd, double dt,
                         const RobotSpec& spec) {
  if (!(dt > 0.0)) throw UsageError("dt must be positive");
  double v = std::clamp(cmd.v, -spec.v_max, spec.v_max);
  const double omega = std::clamp(cmd.omega, -spec.omega_max, spec.omega_max);
  if (spec.a_max) {
    const double current = dot(state.velocity, unit_from_angle(state.pose.heading));
    const double dv = *spec.a_max * dt;
    v = std::clamp(v, current - dv, current + dv);
  }
  const double phi = state.pose.heading;
  AgentState next = state;
  next.velocity = {v * std::cos(phi), v * std::sin(phi)};
  next.pose = Pose2D(state.pose.x + next.velocity.x * dt, state.pose.y + next.velocity.y * dt,
                     phi + omega * dt);
  if (omega == 0.0) next.pose.heading = phi;
  return next;
}

AgentState step_holonomic(const AgentState& state, HolonomicCommand cmd, double dt,
                          const RobotSpec& spec) {
  if (!(dt > 0.0)) throw UsageError("dt must be positive");
  Vec2 v = cmd.velocity;
  if (spec.a_max) {
    const Vec2 dv = v - state.velocity;
    const double limit = *spec.a_max * dt;
    if (norm(dv) > limit) v = state.velocity + dv * (limit / norm(dv));
  }
  const double speed = norm(v);
  if (speed > spec.v_max) v = v * (spec.v_max / speed);
  AgentState next = state;
  next.velocity = v;
  next.pose = Pose2D(state.pose.x + v.x * dt, state.pose.y + v.y * dt,
                     speed > 0.0 ? std::atan2(v.y, v.x) : state.pose.heading);
  return next;
}

AgentState step_robot(const AgentState& state, const VelocityCommand& cmd, double dt,
                      const RobotSpec& spec) {
  if (const auto* u = std::get_if<UnicycleCommand>(&cmd)) {
    if (spec.control_mode != ControlMode::kUnicycle) {
      throw UsageError("unicycle command sent to a holonomic robot");
    }
    return step_unicycle(state, *u, dt, spec);
  }
  if (spec.control_mode != ControlMode::kHolonomic) {
    throw UsageError("holonomic command sent to a unicycle robot");
  }
  return step_holonomic(state, std::get<HolonomicCommand>(cmd), dt, spec);
}

}  // namespace socnav
