#pragma once

#include <optional>
#include <string>
#include <variant>

#include "socnav/core.hpp"

namespace socnav {

enum class ControlMode { kUnicycle, kHolonomic };

std::string to_string(ControlMode mode);
ControlMode control_mode_from_string(const std::string& s);

/// Defaults approximate a Pioneer 3-DX base.
struct RobotSpec {
  double radius = 0.23;
  double v_max = 1.2;
  double omega_max = 1.9;
  std::optional<double> a_max;  // unbounded when empty
  ControlMode control_mode = ControlMode::kUnicycle;

  friend bool operator==(const RobotSpec&, const RobotSpec&) = default;
};

struct UnicycleCommand {
  double v = 0.0;
  double omega = 0.0;
  friend bool operator==(const UnicycleCommand&, const UnicycleCommand&) = default;
};

struct HolonomicCommand {
  Vec2 velocity;
  friend bool operator==(const HolonomicCommand&, const HolonomicCommand&) = default;
};

using VelocityCommand = std::variant<UnicycleCommand, HolonomicCommand>;

/// Zero command in the form matching `mode`.
VelocityCommand zero_command(ControlMode mode);

/// Explicit Euler step of the unicycle model. Commands are clamped to the RobotSpec limits.
/// The stored velocity uses the pre-step heading.
AgentState step_unicycle(const AgentState& state, UnicycleCommand cmd, double dt,
                         const RobotSpec& spec);

/// Velocity-limited holonomic step; the heading follows the velocity when moving.
AgentState step_holonomic(const AgentState& state, HolonomicCommand cmd, double dt,
                          const RobotSpec& spec);

/// Dispatches on the command form. Throws UsageError when it does not match RobotSpec::control_mode.
AgentState step_robot(const AgentState& state, const VelocityCommand& cmd, double dt,
                      const RobotSpec& spec);

}  // namespace socnav
