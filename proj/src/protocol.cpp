#include "socnav/protocol.hpp"

#include "socnav/json_io.hpp"

namespace socnav::protocol {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Json map_ref_to_json(const MapRef& r) {
  return {{"name", r.name},         {"digest", r.digest},         {"width", r.width},
          {"height", r.height},     {"resolution", r.resolution}, {"origin", {r.origin.x, r.origin.y}}};
}

MapRef map_ref_from_json(const Json& j) {
  MapRef r;
  r.name = j.at("name").get<std::string>();
  r.digest = j.at("digest").get<std::string>();
  r.width = j.at("width").get<int>();
  r.height = j.at("height").get<int>();
  r.resolution = j.at("resolution").get<double>();
  r.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
  return r;
}

Json act_to_json(const ActCommand& c) {
  if (const auto* p = std::get_if<PositionTarget>(&c)) {
    return {{"kind", "position"}, {"x", p->target.x}, {"y", p->target.y}};
  }
  if (const auto* u = std::get_if<UnicycleCommand>(&c)) return to_json(VelocityCommand{*u});
  return to_json(VelocityCommand{std::get<HolonomicCommand>(c)});
}

ActCommand act_from_json(const Json& j) {
  if (j.at("kind").get<std::string>() == "position") {
    return PositionTarget{{j.at("x").get<double>(), j.at("y").get<double>()}};
  }
  const VelocityCommand v = command_from_json(j);
  if (const auto* u = std::get_if<UnicycleCommand>(&v)) return *u;
  return std::get<HolonomicCommand>(v);
}

}  // namespace

MapRef map_ref(const EnvironmentMap& env) {
  return {env.name(), env.digest(), env.width(), env.height(), env.resolution(), env.origin()};
}

MapData map_data(const EnvironmentMap& env) {
  MapData d;
  d.ref = map_ref(env);
  for (int r = 0; r < env.height(); ++r) {
    std::string row(static_cast<std::size_t>(env.width()), '#');
    for (int c = 0; c < env.width(); ++c) {
      if (env.is_free(c, r)) row[static_cast<std::size_t>(c)] = '.';
    }
    d.rows.push_back(std::move(row));
  }
  return d;
}

EnvironmentMap environment_from_map_data(const MapData& data) {
  const auto& ref = data.ref;
  if (static_cast<int>(data.rows.size()) != ref.height) throw ProtocolError("map row count mismatch");
  std::vector<std::uint8_t> cells;
  cells.reserve(static_cast<std::size_t>(ref.width) * ref.height);
  for (const auto& row : data.rows) {
    if (static_cast<int>(row.size()) != ref.width) throw ProtocolError("map row width mismatch");
    for (char ch : row) cells.push_back(ch == '.' ? 1 : 0);
  }
  EnvironmentMap env(ref.name, ref.width, ref.height, ref.resolution, ref.origin, std::move(cells));
  if (env.digest() != ref.digest) throw ProtocolError("map digest mismatch for '" + ref.name + "'");
  return env;
}

std::string type_name(const Message& m) {
  return std::visit(Overloaded{
                        [](const Hello&) { return "hello"; },
                        [](const EpisodeList&) { return "episode_list"; },
                        [](const EpisodeStart&) { return "episode_start"; },
                        [](const GetMap&) { return "get_map"; },
                        [](const MapData&) { return "map"; },
                        [](const Sense&) { return "sense"; },
                        [](const WorldState&) { return "world_state"; },
                        [](const Act&) { return "act"; },
                        [](const EpisodeEnd&) { return "episode_end"; },
                        [](const Bye&) { return "bye"; },
                        [](const Error&) { return "error"; },
                    },
                    m);
}

std::string encode(const Message& m) {
  Json j = std::visit(
      Overloaded{
          [](const Hello& h) {
            Json o = {{"version", h.version}, {"agent", h.agent}};
            if (h.control_mode) o["control_mode"] = to_string(*h.control_mode);
            if (h.mode) o["mode"] = *h.mode;
            if (h.robot) o["robot"] = to_json(*h.robot);
            return o;
          },
          [](const EpisodeList& l) {
            Json eps = Json::array();
            for (const auto& e : l.episodes) {
              eps.push_back({{"name", e.name},
                             {"environment", e.environment},
                             {"time_budget", e.time_budget},
                             {"tick_rate", e.tick_rate}});
            }
            return Json{{"episodes", std::move(eps)}};
          },
          [](const EpisodeStart& s) {
            return Json{{"index", s.index},
                        {"name", s.name},
                        {"environment", map_ref_to_json(s.environment)},
                        {"time_budget", s.time_budget},
                        {"tick_rate", s.tick_rate},
                        {"start", to_json(s.start)},
                        {"goal", {{"x", s.goal.x}, {"y", s.goal.y}}},
                        {"goal_radius", s.goal_radius},
                        {"robot", to_json(s.robot)}};
          },
          [](const GetMap&) { return Json::object(); },
          [](const MapData& d) {
            Json o = map_ref_to_json(d.ref);
            o["rows"] = d.rows;
            return o;
          },
          [](const Sense&) { return Json::object(); },
          [](const WorldState& w) {
            Json o = to_json(w.state);
            o["terminated"] = w.state.termination.has_value();
            return o;
          },
          [](const Act& a) { return Json{{"command", act_to_json(a.command)}}; },
          [](const EpisodeEnd& e) {
            return Json{{"name", e.name}, {"termination", to_json(e.termination)}, {"metrics", e.metrics}};
          },
          [](const Bye&) { return Json::object(); },
          [](const Error& e) { return Json{{"reason", e.reason}, {"fatal", e.fatal}}; },
      },
      m);
  j["type"] = type_name(m);
  return j.dump() + "\n";
}

Message decode(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw ProtocolError("malformed message at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  std::string type;
  try {
    type = j.at("type").get<std::string>();
  } catch (const Json::exception&) {
    throw ProtocolError("message is missing its 'type'");
  }
  try {
    if (type == "hello") {
      Hello h;
      h.version = j.at("version").get<int>();
      if (h.version != kVersion) {
        throw ProtocolError("protocol version mismatch: expected " + std::to_string(kVersion) +
                            ", got " + std::to_string(h.version));
      }
      h.agent = j.value("agent", std::string{});
      if (j.contains("control_mode")) {
        h.control_mode = control_mode_from_string(j["control_mode"].get<std::string>());
      }
      if (j.contains("mode")) h.mode = j["mode"].get<std::string>();
      if (j.contains("robot")) h.robot = robot_spec_from_json(j["robot"]);
      return h;
    }
    if (type == "episode_list") {
      EpisodeList l;
      for (const auto& e : j.at("episodes")) {
        l.episodes.push_back({e.at("name").get<std::string>(), e.at("environment").get<std::string>(),
                              e.at("time_budget").get<double>(), e.at("tick_rate").get<double>()});
      }
      return l;
    }
    if (type == "episode_start") {
      EpisodeStart s;
      s.index = j.at("index").get<int>();
      s.name = j.at("name").get<std::string>();
      s.environment = map_ref_from_json(j.at("environment"));
      s.time_budget = j.at("time_budget").get<double>();
      s.tick_rate = j.at("tick_rate").get<double>();
      s.start = pose_from_json(j.at("start"));
      s.goal = {j.at("goal").at("x").get<double>(), j.at("goal").at("y").get<double>()};
      s.goal_radius = j.at("goal_radius").get<double>();
      s.robot = robot_spec_from_json(j.at("robot"));
      return s;
    }
    if (type == "get_map") return GetMap{};
    if (type == "map") {
      MapData d;
      d.ref = map_ref_from_json(j);
      d.rows = j.at("rows").get<std::vector<std::string>>();
      return d;
    }
    if (type == "sense") return Sense{};
    if (type == "world_state") {
      WorldState w{sim_state_from_json(j)};
      if (j.at("terminated").get<bool>() != w.state.termination.has_value()) {
        throw ProtocolError("world_state 'terminated' flag disagrees with 'termination'");
      }
      return w;
    }
    if (type == "act") return Act{act_from_json(j.at("command"))};
    if (type == "episode_end") {
      return EpisodeEnd{j.at("name").get<std::string>(), termination_from_json(j.at("termination")),
                        j.value("metrics", Json::object())};
    }
    if (type == "bye") return Bye{};
    if (type == "error") return Error{j.at("reason").get<std::string>(), j.value("fatal", false)};
  } catch (const Json::exception& e) {
    throw ProtocolError("invalid '" + type + "' message: " + e.what());
  } catch (const ParseError& e) {
    throw ProtocolError("invalid '" + type + "' message: " + e.what());
  } catch (const UsageError& e) {
    throw ProtocolError("invalid '" + type + "' message: " + e.what());
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

VelocityCommand resolve_act(const ActCommand& command, const AgentState& robot, double dt,
                            ControlMode mode) {
  if (const auto* p = std::get_if<PositionTarget>(&command)) {
    if (mode != ControlMode::kHolonomic) {
      throw ProtocolError("position commands require the holonomic control mode");
    }
    return HolonomicCommand{(p->target - robot.position()) / dt};
  }
  if (std::holds_alternative<UnicycleCommand>(command)) {
    if (mode != ControlMode::kUnicycle) {
      throw ProtocolError("unicycle command sent while the robot is in holonomic mode");
    }
    return std::get<UnicycleCommand>(command);
  }
  if (mode != ControlMode::kHolonomic) {
    throw ProtocolError("holonomic command sent while the robot is in unicycle mode");
  }
  return std::get<HolonomicCommand>(command);
}

}  // namespace socnav::protocol
