#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "socnav/core.hpp"
#include "socnav/robot.hpp"
#include "socnav/sim.hpp"

namespace socnav::protocol {

inline constexpr int kVersion = 1;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Opens a session in both directions; `version` is mandatory.
struct Hello {
  int version = kVersion;
  std::string agent;
  std::optional<ControlMode> control_mode;  // client's requested control mode
  std::optional<std::string> mode;          // server's synchronicity: "sync" or "async"
  std::optional<RobotSpec> robot;           // server's robot defaults
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct EpisodeSummary {
  std::string name;
  std::string environment;
  double time_budget = 60.0;
  double tick_rate = 25.0;
  friend bool operator==(const EpisodeSummary&, const EpisodeSummary&) = default;
};

struct EpisodeList {
  std::vector<EpisodeSummary> episodes;
  friend bool operator==(const EpisodeList&, const EpisodeList&) = default;
};

struct MapRef {
  std::string name;
  std::string digest;
  int width = 0;
  int height = 0;
  double resolution = 0.0;
  Vec2 origin;
  friend bool operator==(const MapRef&, const MapRef&) = default;
};

MapRef map_ref(const EnvironmentMap& env);

struct EpisodeStart {
  int index = 0;
  std::string name;
  MapRef environment;
  double time_budget = 60.0;
  double tick_rate = 25.0;
  Pose2D start;
  Vec2 goal;
  double goal_radius = 0.3;
  RobotSpec robot;
  friend bool operator==(const EpisodeStart&, const EpisodeStart&) = default;
};

struct GetMap {
  friend bool operator==(const GetMap&, const GetMap&) = default;
};

/// Full occupancy grid; rows[0] is the bottom row, '.' free and '#' blocked.
struct MapData {
  MapRef ref;
  std::vector<std::string> rows;
  friend bool operator==(const MapData&, const MapData&) = default;
};

MapData map_data(const EnvironmentMap& env);
EnvironmentMap environment_from_map_data(const MapData& data);

struct Sense {
  friend bool operator==(const Sense&, const Sense&) = default;
};

struct WorldState {
  SimState state;
  friend bool operator==(const WorldState&, const WorldState&) = default;
};

/// Direct position control: the server converts it to a one-tick holonomic velocity.
struct PositionTarget {
  Vec2 target;
  friend bool operator==(const PositionTarget&, const PositionTarget&) = default;
};

using ActCommand = std::variant<UnicycleCommand, HolonomicCommand, PositionTarget>;

struct Act {
  ActCommand command;
  friend bool operator==(const Act&, const Act&) = default;
};

struct EpisodeEnd {
  std::string name;
  Termination termination;
  nlohmann::json metrics = nlohmann::json::object();
  friend bool operator==(const EpisodeEnd&, const EpisodeEnd&) = default;
};

struct Bye {
  friend bool operator==(const Bye&, const Bye&) = default;
};

struct Error {
  std::string reason;
  bool fatal = false;
  friend bool operator==(const Error&, const Error&) = default;
};

using Message = std::variant<Hello, EpisodeList, EpisodeStart, GetMap, MapData, Sense, WorldState,
                             Act, EpisodeEnd, Bye, Error>;

std::string type_name(const Message& m);

/// One JSON document terminated by '\n'.
std::string encode(const Message& m);
/// Parses one line (trailing newline optional). Throws ProtocolError naming the failure.
Message decode(std::string_view line);

/// Converts an act to the velocity command applied for one tick of length `dt`.
/// Throws ProtocolError when the command form does not fit the robot's control mode.
VelocityCommand resolve_act(const ActCommand& command, const AgentState& robot, double dt,
                            ControlMode mode);

}  // namespace socnav::protocol
