#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "socnav/core.hpp"
#include "socnav/robot.hpp"
#include "socnav/sim.hpp"

namespace socnav {

using Json = nlohmann::json;

Json to_json(const Pose2D& pose);
Pose2D pose_from_json(const Json& j);
Json to_json(const AgentState& agent);
AgentState agent_from_json(const Json& j);
Json to_json(const VelocityCommand& command);
VelocityCommand command_from_json(const Json& j);
Json to_json(const RobotSpec& spec);
RobotSpec robot_spec_from_json(const Json& j, RobotSpec defaults = {});
Json to_json(const Termination& t);
Termination termination_from_json(const Json& j);
Json to_json(const SimState& state);
SimState sim_state_from_json(const Json& j);

/// One header line, one line per tick, then one summary line.
std::string episode_log_to_jsonl(const EpisodeLog& log);
EpisodeLog episode_log_from_jsonl(std::string_view text);

}  // namespace socnav
