#include "socnav/json_io.hpp"

namespace socnav {

namespace {

Json contact_to_json(const Contact& c) {
  if (c.kind == ContactKind::kEnvironment) return {{"kind", "environment"}};
  return {{"kind", "pedestrian"}, {"id", c.other}};
}

Contact contact_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "environment") return {ContactKind::kEnvironment, 0};
  if (kind == "pedestrian") return {ContactKind::kPedestrian, j.at("id").get<AgentId>()};
  throw ParseError("unknown contact kind '" + kind + "'");
}

Json event_to_json(const CollisionEvent& e) {
  Json j = contact_to_json({e.kind, e.other});
  j["start_tick"] = e.start_tick;
  j["end_tick"] = e.end_tick;
  return j;
}

CollisionEvent event_from_json(const Json& j) {
  const Contact c = contact_from_json(j);
  return {c.kind, c.other, j.at("start_tick").get<std::int64_t>(),
          j.at("end_tick").get<std::int64_t>()};
}

}  // namespace

Json to_json(const Pose2D& pose) {
  return {{"x", pose.x}, {"y", pose.y}, {"heading", pose.heading}};
}

Pose2D pose_from_json(const Json& j) {
  return Pose2D(j.at("x").get<double>(), j.at("y").get<double>(), j.value("heading", 0.0));
}

Json to_json(const AgentState& a) {
  return {{"id", a.id},          {"x", a.pose.x},       {"y", a.pose.y},    {"heading", a.pose.heading},
          {"vx", a.velocity.x}, {"vy", a.velocity.y}, {"radius", a.radius}};
}

AgentState agent_from_json(const Json& j) {
  AgentState a;
  a.id = j.at("id").get<AgentId>();
  a.pose = pose_from_json(j);
  a.velocity = {j.at("vx").get<double>(), j.at("vy").get<double>()};
  a.radius = j.at("radius").get<double>();
  return a;
}

Json to_json(const VelocityCommand& command) {
  if (const auto* u = std::get_if<UnicycleCommand>(&command)) {
    return {{"kind", "unicycle"}, {"v", u->v}, {"omega", u->omega}};
  }
  const auto& h = std::get<HolonomicCommand>(command);
  return {{"kind", "holonomic"}, {"vx", h.velocity.x}, {"vy", h.velocity.y}};
}

VelocityCommand command_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "unicycle") return UnicycleCommand{j.at("v").get<double>(), j.at("omega").get<double>()};
  if (kind == "holonomic") {
    return HolonomicCommand{{j.at("vx").get<double>(), j.at("vy").get<double>()}};
  }
  throw ParseError("unknown command kind '" + kind + "'");
}

Json to_json(const RobotSpec& spec) {
  Json j = {{"radius", spec.radius},
            {"v_max", spec.v_max},
            {"omega_max", spec.omega_max},
            {"control_mode", to_string(spec.control_mode)}};
  j["a_max"] = spec.a_max ? Json(*spec.a_max) : Json(nullptr);
  return j;
}

RobotSpec robot_spec_from_json(const Json& j, RobotSpec spec) {
  spec.radius = j.value("radius", spec.radius);
  spec.v_max = j.value("v_max", spec.v_max);
  spec.omega_max = j.value("omega_max", spec.omega_max);
  if (j.contains("a_max")) {
    spec.a_max = j["a_max"].is_null() ? std::nullopt : std::optional<double>(j["a_max"].get<double>());
  }
  if (j.contains("control_mode")) {
    spec.control_mode = control_mode_from_string(j["control_mode"].get<std::string>());
  }
  if (!(spec.v_max > 0.0) || !(spec.radius > 0.0) || !(spec.omega_max > 0.0)) {
    throw ParseError("robot spec: radius, v_max and omega_max must be positive");
  }
  return spec;
}

Json to_json(const Termination& t) {
  return {{"kind", to_string(t.kind)},
          {"success", t.success},
          {"pedestrian_collisions", t.pedestrian_collisions}};
}

Termination termination_from_json(const Json& j) {
  Termination t;
  t.kind = termination_kind_from_string(j.at("kind").get<std::string>());
  t.success = j.at("success").get<bool>();
  t.pedestrian_collisions = j.at("pedestrian_collisions").get<int>();
  return t;
}

Json to_json(const SimState& state) {
  Json peds = Json::array();
  for (const auto& p : state.pedestrians) peds.push_back(to_json(p));
  return {{"sim_time", state.sim_time},
          {"tick", state.tick},
          {"robot", to_json(state.robot)},
          {"pedestrians", std::move(peds)},
          {"termination", state.termination ? to_json(*state.termination) : Json(nullptr)}};
}

SimState sim_state_from_json(const Json& j) {
  SimState s;
  s.sim_time = j.at("sim_time").get<double>();
  s.tick = j.at("tick").get<std::int64_t>();
  s.robot = agent_from_json(j.at("robot"));
  for (const auto& p : j.at("pedestrians")) s.pedestrians.push_back(agent_from_json(p));
  if (j.contains("termination") && !j["termination"].is_null()) {
    s.termination = termination_from_json(j["termination"]);
  }
  return s;
}

std::string episode_log_to_jsonl(const EpisodeLog& log) {
  std::string out;
  const Json header = {{"type", "header"},
                       {"episode", log.episode},
                       {"environment", log.environment},
                       {"tick_rate", log.tick_rate},
                       {"time_budget", log.time_budget},
                       {"start", to_json(log.start)},
                       {"goal", {{"x", log.goal.x}, {"y", log.goal.y}}},
                       {"goal_radius", log.goal_radius},
                       {"robot", to_json(log.robot)}};
  out += header.dump() + "\n";
  for (const auto& r : log.records) {
    Json contacts = Json::array();
    for (const auto& c : r.contacts) contacts.push_back(contact_to_json(c));
    Json line = to_json(r.state);
    line["type"] = "tick";
    line["command"] = r.command ? to_json(*r.command) : Json(nullptr);
    line["planning_wait"] = r.planning_wait;
    line["contacts"] = std::move(contacts);
    out += line.dump() + "\n";
  }
  Json events = Json::array();
  for (const auto& e : log.collisions) events.push_back(event_to_json(e));
  const Json summary = {{"type", "summary"},
                        {"termination", to_json(log.termination)},
                        {"transport_failure", log.transport_failure},
                        {"ticks", log.records.empty() ? 0 : log.records.back().state.tick},
                        {"collisions", std::move(events)},
                        {"total_planning_wait", log.total_planning_wait}};
  out += summary.dump() + "\n";
  return out;
}

EpisodeLog episode_log_from_jsonl(std::string_view text) {
  EpisodeLog log;
  bool have_header = false;
  bool have_summary = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        log.episode = j.at("episode").get<std::string>();
        log.environment = j.at("environment").get<std::string>();
        log.tick_rate = j.at("tick_rate").get<double>();
        log.time_budget = j.at("time_budget").get<double>();
        log.start = pose_from_json(j.at("start"));
        log.goal = {j.at("goal").at("x").get<double>(), j.at("goal").at("y").get<double>()};
        log.goal_radius = j.at("goal_radius").get<double>();
        log.robot = robot_spec_from_json(j.at("robot"));
        have_header = true;
      } else if (type == "tick") {
        TickRecord r;
        r.state = sim_state_from_json(j);
        if (!j.at("command").is_null()) r.command = command_from_json(j["command"]);
        r.planning_wait = j.at("planning_wait").get<double>();
        for (const auto& c : j.at("contacts")) r.contacts.push_back(contact_from_json(c));
        if (!log.records.empty() && r.state.tick != log.records.back().state.tick + 1) {
          throw ParseError("tick records are not contiguous");
        }
        log.records.push_back(std::move(r));
      } else if (type == "summary") {
        log.termination = termination_from_json(j.at("termination"));
        log.transport_failure = j.at("transport_failure").get<bool>();
        for (const auto& e : j.at("collisions")) log.collisions.push_back(event_from_json(e));
        log.total_planning_wait = j.at("total_planning_wait").get<double>();
        have_summary = true;
      } else {
        throw ParseError("unknown record type '" + type + "'");
      }
    } catch (const Json::exception& e) {
      throw ParseError("episode log line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("episode log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header || !have_summary) throw ParseError("episode log is missing its header or summary");
  return log;
}

}  // namespace socnav
