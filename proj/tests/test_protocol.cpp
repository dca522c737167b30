#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

#include "socnav/json_io.hpp"
#include "socnav/protocol.hpp"
#include "socnav/report.hpp"
#include "socnav/server.hpp"
#include "socnav/transport.hpp"
#include "support.hpp"

using namespace socnav;
namespace proto = socnav::protocol;
using nlohmann::json;

namespace {

bool update_golden() { return std::getenv("SOCNAV_UPDATE_GOLDEN") != nullptr; }

std::filesystem::path golden(const std::string& name) { return fixture::source_dir() / "tests" / "golden" / name; }

void check_golden(const std::string& name, const std::string& text) {
  if (update_golden()) {
    std::filesystem::create_directories(golden(name).parent_path());
    write_text_file(golden(name), text);
  }
  EXPECT_EQ(read_text_file(golden(name)), text) << name;
}

SimState sample_state(int pedestrians, bool terminated) {
  SimState s;
  s.tick = 17;
  s.sim_time = 0.68;
  s.robot.id = kRobotId;
  s.robot.pose = Pose2D(1.25, 2.5, 0.75);
  s.robot.velocity = {0.5, -0.25};
  s.robot.radius = 0.23;
  for (int i = 0; i < pedestrians; ++i) {
    AgentState p;
    p.id = 100 + 3 * i;
    p.pose = Pose2D(0.5 * i, 10.0 - 0.25 * i, 0.1 * i);
    p.velocity = {0.125 * i, -0.5};
    p.radius = 0.3;
    s.pedestrians.push_back(p);
  }
  if (terminated) s.termination = make_termination(TerminationKind::kTimeout, 2);
  return s;
}

/// One instance of every message form, in a fixed order.
std::vector<proto::Message> canonical_messages() {
  const auto env = fixture::open_room(4, 3, 0.5, 0, "tiny");
  proto::Hello client_hello;
  client_hello.agent = "example-client";
  client_hello.control_mode = ControlMode::kHolonomic;
  proto::Hello server_hello;
  server_hello.agent = "socnavbench";
  server_hello.control_mode = ControlMode::kUnicycle;
  server_hello.mode = "sync";
  server_hello.robot = RobotSpec{};
  proto::EpisodeStart start;
  start.index = 0;
  start.name = "demo_episode";
  start.environment = proto::map_ref(env);
  start.start = Pose2D(0.5, 0.5, 0.25);
  start.goal = {1.5, 1.0};
  start.robot = RobotSpec{};
  return {client_hello,
          server_hello,
          proto::EpisodeList{{{"demo_episode", "tiny", 60.0, 25.0}, {"second", "tiny", 30.0, 10.0}}},
          start,
          proto::GetMap{},
          proto::map_data(env),
          proto::Sense{},
          proto::WorldState{sample_state(2, false)},
          proto::WorldState{sample_state(1, true)},
          proto::Act{UnicycleCommand{1.2, -0.5}},
          proto::Act{HolonomicCommand{{0.6, 0.8}}},
          proto::Act{proto::PositionTarget{{2.0, 3.5}}},
          proto::EpisodeEnd{"demo_episode", make_termination(TerminationKind::kCompletion, 0), {{"ticks", 42}}},
          proto::Bye{},
          proto::Error{"act without a preceding sense", false}};
}

/// Subset of JSON Schema used by the shipped schema file.
class SchemaCheck {
 public:
  explicit SchemaCheck(json root) : root_(std::move(root)) {}
  bool valid(const json& doc) const { return check(root_, doc); }

 private:
  const json& resolve(const json& s) const {
    if (!s.contains("$ref")) return s;
    const std::string ref = s["$ref"];
    return root_.at("$defs").at(ref.substr(std::string("#/$defs/").size()));
  }
  static bool type_ok(const std::string& t, const json& d) {
    if (t == "object") return d.is_object();
    if (t == "array") return d.is_array();
    if (t == "string") return d.is_string();
    if (t == "integer") return d.is_number_integer();
    if (t == "number") return d.is_number();
    if (t == "boolean") return d.is_boolean();
    if (t == "null") return d.is_null();
    return false;
  }
  bool check(const json& schema, const json& d) const {
    const json& s = resolve(schema);
    if (s.contains("oneOf")) {
      int matches = 0;
      for (const auto& alt : s["oneOf"]) matches += check(alt, d) ? 1 : 0;
      if (matches != 1) return false;
    }
    if (s.contains("const") && s["const"] != d) return false;
    if (s.contains("enum") && std::find(s["enum"].begin(), s["enum"].end(), d) == s["enum"].end()) return false;
    if (s.contains("type")) {
      bool ok = false;
      if (s["type"].is_array()) {
        for (const auto& t : s["type"]) ok = ok || type_ok(t, d);
      } else {
        ok = type_ok(s["type"], d);
      }
      if (!ok) return false;
    }
    if (d.is_object()) {
      for (const auto& key : s.value("required", json::array())) {
        if (!d.contains(key.get<std::string>())) return false;
      }
      const json props = s.value("properties", json::object());
      for (const auto& [key, value] : d.items()) {
        if (props.contains(key)) {
          if (!check(props[key], value)) return false;
        } else if (s.value("additionalProperties", true) == false) {
          return false;
        }
      }
    }
    if (d.is_array() && s.contains("items")) {
      for (const auto& item : d) {
        if (!check(s["items"], item)) return false;
      }
    }
    return true;
  }
  json root_;
};

SchemaCheck shipped_schema() {
  return SchemaCheck(json::parse(read_text_file(fixture::source_dir() / "schema" / "protocol.schema.json")));
}

struct Loopback {
  Listener listener{parse_address("127.0.0.1:0")};
  Connection server_side;
  Connection client_side;
  Loopback() {
    auto accepted = std::async(std::launch::async, [this] { return listener.accept(5.0); });
    client_side = connect_to(listener.address(), 5.0);
    server_side = accepted.get();
  }
};

struct OpenWorld {
  EpisodeLibrary library;
  std::vector<Episode> episodes;
  OpenWorld() {
    library.environments.emplace("room", fixture::open_room(120, 60, 0.1, 0, "room"));
    episodes.push_back(fixture::make_episode("straight", "room", Pose2D(2, 3, 0), {3.5, 3},
                                             {fixture::straight_track(9, {6, 1}, {0, 0.5}, 0, 100, 25.0)}));
    library.episodes = episodes;
  }
};

class ScriptedClient {
 public:
  explicit ScriptedClient(Connection& c) : c_(c) {}
  void send(const proto::Message& m) { c_.write(proto::encode(m)); }
  void send_raw(const std::string& line) { c_.write(line + "\n"); }
  proto::Message receive() {
    auto line = c_.read_line(5.0);
    if (!line) throw TransportError("closed");
    return proto::decode(*line);
  }
  template <class T>
  T expect() {
    auto m = receive();
    if (!std::holds_alternative<T>(m)) throw std::runtime_error("unexpected " + proto::type_name(m));
    return std::get<T>(m);
  }

 private:
  Connection& c_;
};

ServeOptions deterministic_options(std::vector<std::string>* transcript = nullptr) {
  ServeOptions o;
  o.clock = null_wall_clock();
  o.receive_deadline = 5.0;
  o.transcript = transcript;
  return o;
}

}  // namespace

TEST(Codec, RoundTripEveryMessage) {
  for (const auto& m : canonical_messages()) {
    const auto line = proto::encode(m);
    ASSERT_EQ(line.back(), '\n');
    EXPECT_EQ(line.find('\n'), line.size() - 1);
    EXPECT_EQ(proto::decode(line), m) << line;
  }
}

TEST(Codec, WorldStateWith44Pedestrians) {
  const proto::WorldState w{sample_state(44, false)};
  const auto back = std::get<proto::WorldState>(proto::decode(proto::encode(w)));
  ASSERT_EQ(back.state.pedestrians.size(), 44u);
  for (std::size_t i = 0; i < 44; ++i) EXPECT_EQ(back.state.pedestrians[i].id, w.state.pedestrians[i].id);
  EXPECT_EQ(back, w);
}

TEST(Codec, DecodeErrors) {
  const auto line = proto::encode(proto::Act{UnicycleCommand{1, 0}});
  try {
    proto::decode(line.substr(0, 20));
    FAIL() << "truncated line decoded";
  } catch (const proto::ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("at byte 21"), std::string::npos) << e.what();
  }
  try {
    proto::decode(R"({"type":"hello","version":2})");
    FAIL() << "stale version accepted";
  } catch (const proto::ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("version mismatch: expected 1, got 2"), std::string::npos);
  }
  EXPECT_THROW(proto::decode(R"({"type":"hello"})"), proto::ProtocolError);
  EXPECT_THROW(proto::decode(R"({"type":"teleport"})"), proto::ProtocolError);
  EXPECT_THROW(proto::decode(R"({"version":1})"), proto::ProtocolError);
  EXPECT_THROW(proto::decode(R"([1,2])"), proto::ProtocolError);
  EXPECT_THROW(proto::decode(R"({"type":"act","command":{"kind":"warp"}})"), proto::ProtocolError);
  EXPECT_THROW(proto::decode(R"({"type":"world_state","tick":1,"sim_time":0.04,"robot":{"id":-1,"x":0,"y":0,"heading":0,"vx":0,"vy":0,"radius":0.23},"pedestrians":[],"termination":null,"terminated":true})"),
               proto::ProtocolError);
}

TEST(Codec, MapDataRoundTripAndDigest) {
  std::vector<std::uint8_t> cells(12, 1);
  cells[1] = 0;
  cells[10] = 0;
  EnvironmentMap env("m", 4, 3, 0.5, {1, 2}, cells);
  const auto data = proto::map_data(env);
  EXPECT_EQ(data.rows[0], ".#..");
  EXPECT_EQ(data.rows[2], "..#.");
  const auto back = proto::environment_from_map_data(data);
  EXPECT_EQ(back.digest(), env.digest());
  auto tampered = data;
  tampered.rows[1][0] = '#';
  EXPECT_THROW(proto::environment_from_map_data(tampered), proto::ProtocolError);
}

TEST(Codec, PositionTargetConversion) {
  AgentState robot;
  robot.pose = Pose2D(1.0, 1.0, 0.0);
  const auto cmd = proto::resolve_act(proto::PositionTarget{{1.02, 1.04}}, robot, 0.04, ControlMode::kHolonomic);
  const auto v = std::get<HolonomicCommand>(cmd).velocity;
  EXPECT_NEAR(v.x, 0.5, 1e-12);
  EXPECT_NEAR(v.y, 1.0, 1e-12);
  // The robot module then clamps the one-tick velocity.
  RobotSpec spec;
  spec.control_mode = ControlMode::kHolonomic;
  const auto far = proto::resolve_act(proto::PositionTarget{{5.0, 1.0}}, robot, 0.04, ControlMode::kHolonomic);
  const auto next = step_robot(robot, far, 0.04, spec);
  EXPECT_NEAR(next.pose.x, 1.0 + 1.2 * 0.04, 1e-12);
  EXPECT_THROW(proto::resolve_act(proto::PositionTarget{{2, 2}}, robot, 0.04, ControlMode::kUnicycle),
               proto::ProtocolError);
  EXPECT_THROW(proto::resolve_act(UnicycleCommand{1, 0}, robot, 0.04, ControlMode::kHolonomic), proto::ProtocolError);
}

TEST(Schema, CanonicalMessagesConform) {
  const auto schema = shipped_schema();
  std::string fixtures;
  for (const auto& m : canonical_messages()) {
    const auto line = proto::encode(m);
    EXPECT_TRUE(schema.valid(json::parse(line))) << line;
    fixtures += line;
  }
  check_golden("messages.jsonl", fixtures);
  EXPECT_FALSE(schema.valid(json::parse(R"({"type":"hello","version":2})")));
  EXPECT_FALSE(schema.valid(json::parse(R"({"type":"act","command":{"kind":"unicycle","v":1}})")));
  EXPECT_FALSE(schema.valid(json::parse(R"({"type":"sense","extra":1})")));
}

TEST(Schema, GoldenFixturesRoundTripByteIdentical) {
  std::istringstream in(read_text_file(golden("messages.jsonl")));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(proto::encode(proto::decode(line)), line + "\n");
    ++n;
  }
  EXPECT_EQ(n, static_cast<int>(canonical_messages().size()));
}

TEST(Transport, AddressParsing) {
  auto a = parse_address("10.0.0.2:7000");
  EXPECT_EQ(a.kind, Address::Kind::kTcp);
  EXPECT_EQ(a.host, "10.0.0.2");
  EXPECT_EQ(a.port, 7000);
  auto u = parse_address("unix:/tmp/socnav.sock");
  EXPECT_EQ(u.kind, Address::Kind::kUnix);
  EXPECT_EQ(u.path, "/tmp/socnav.sock");
  EXPECT_THROW(parse_address("localhost"), UsageError);
  EXPECT_THROW(parse_address("host:99999"), UsageError);
}

TEST(Transport, WrongPortNamesAddress) {
  Address a = parse_address("127.0.0.1:1");
  try {
    connect_to(a, 0.2);
    FAIL() << "connected to a closed port";
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("127.0.0.1:1"), std::string::npos) << e.what();
  }
}

TEST(Transport, ReadDeadline) {
  Loopback lb;
  EXPECT_THROW(lb.server_side.read_line(0.1), TransportError);
  lb.client_side.write("hi\n");
  EXPECT_EQ(lb.server_side.read_line(1.0), std::optional<std::string>("hi"));
  lb.client_side.close();
  EXPECT_EQ(lb.server_side.read_line(1.0), std::nullopt);
}

TEST(Transport, UnixSocket) {
  const auto path = fixture::temp_dir("unix") / "s.sock";
  Listener listener(parse_address("unix:" + path.string()));
  auto accepted = std::async(std::launch::async, [&] { return listener.accept(5.0); });
  Connection c = connect_to(listener.address(), 5.0);
  Connection s = accepted.get();
  c.write("ping\n");
  EXPECT_EQ(s.read_line(1.0), std::optional<std::string>("ping"));
}

namespace {

/// Straight-line unicycle client; returns the transcript lines it saw.
std::vector<std::string> drive_straight(Connection& conn, int version = 1) {
  ScriptedClient c(conn);
  std::vector<std::string> seen;
  if (version == 1) {
    c.send(proto::Hello{1, "scripted", std::nullopt, std::nullopt, std::nullopt});
  } else {
    c.send_raw(R"({"agent":"scripted","type":"hello","version":)" + std::to_string(version) + "}");
  }
  auto hello = c.receive();
  if (std::holds_alternative<proto::Error>(hello)) return {proto::encode(hello)};
  const auto list = c.expect<proto::EpisodeList>();
  for (std::size_t i = 0; i < list.episodes.size(); ++i) {
    c.expect<proto::EpisodeStart>();
    while (true) {
      c.send(proto::Sense{});
      const auto w = c.expect<proto::WorldState>();
      if (w.state.termination) break;
      c.send(proto::Act{UnicycleCommand{1.2, 0.0}});
    }
    const auto end = c.expect<proto::EpisodeEnd>();
    seen.push_back(to_string(end.termination.kind));
  }
  c.expect<proto::Bye>();
  return seen;
}

}  // namespace

TEST(Session, StraightLineGoldenTranscript) {
  OpenWorld world;
  Loopback lb;
  std::vector<std::string> transcript;
  const auto options = deterministic_options(&transcript);
  auto client = std::async(std::launch::async, [&] { return drive_straight(lb.client_side); });
  const auto result = serve_connection(world.library, world.episodes, lb.server_side, options);
  const auto outcomes = client.get();
  ASSERT_TRUE(result.completed) << result.error;
  ASSERT_EQ(outcomes, std::vector<std::string>{"Completion"});
  EXPECT_EQ(result.agent, "scripted");
  ASSERT_EQ(result.logs.size(), 1u);

  // One sense and one act per tick, plus a fixed set around them.
  const auto ticks = static_cast<std::size_t>(result.logs[0].records.back().state.tick);
  std::size_t received = 0;
  for (const auto& line : transcript) received += line.rfind("< ", 0) == 0 ? 1 : 0;
  EXPECT_EQ(received, 2 * ticks + 2);  // hello and the final sense
  EXPECT_EQ(transcript.size(), 3 * ticks + 8);

  // Every served state follows x = 2 + v_max * dt * tick.
  for (const auto& line : transcript) {
    if (line.rfind("> ", 0) != 0) continue;
    const auto m = proto::decode(line.substr(2));
    if (const auto* w = std::get_if<proto::WorldState>(&m)) {
      EXPECT_NEAR(w->state.robot.pose.x, 2.0 + 0.048 * static_cast<double>(w->state.tick), 1e-12);
      EXPECT_EQ(w->state.robot.pose.y, 3.0);
    }
  }

  std::string text;
  for (const auto& line : transcript) text += line + "\n";
  check_golden("straight_transcript.txt", text);
}

TEST(Session, TranscriptIsDeterministic) {
  OpenWorld world;
  std::vector<std::string> first;
  std::vector<std::string> second;
  for (auto* t : {&first, &second}) {
    Loopback lb;
    auto client = std::async(std::launch::async, [&] { return drive_straight(lb.client_side); });
    serve_connection(world.library, world.episodes, lb.server_side, deterministic_options(t));
    client.get();
  }
  EXPECT_EQ(first, second);
}

TEST(Session, StaleVersionRejected) {
  OpenWorld world;
  Loopback lb;
  auto client = std::async(std::launch::async, [&] { return drive_straight(lb.client_side, 2); });
  EXPECT_THROW(serve_connection(world.library, world.episodes, lb.server_side, deterministic_options()),
               proto::ProtocolError);
  const auto reply = client.get();
  ASSERT_EQ(reply.size(), 1u);
  const auto err = std::get<proto::Error>(proto::decode(reply[0]));
  EXPECT_TRUE(err.fatal);
  EXPECT_NE(err.reason.find("version mismatch"), std::string::npos);
}

TEST(Session, ActTwiceGetsErrorAndSessionContinues) {
  OpenWorld world;
  Loopback lb;
  auto client = std::async(std::launch::async, [&] {
    ScriptedClient c(lb.client_side);
    c.send(proto::Hello{1, "twice", std::nullopt, std::nullopt, std::nullopt});
    c.expect<proto::Hello>();
    c.expect<proto::EpisodeList>();
    c.expect<proto::EpisodeStart>();
    c.send(proto::Act{UnicycleCommand{1.2, 0}});  // before any sense
    const auto e1 = c.expect<proto::Error>();
    c.send(proto::Sense{});
    c.expect<proto::WorldState>();
    c.send(proto::Act{UnicycleCommand{1.2, 0}});
    c.send(proto::Act{UnicycleCommand{1.2, 0}});  // second act for the same tick
    const auto e2 = c.expect<proto::Error>();
    c.send_raw("{not json");
    const auto e3 = c.expect<proto::Error>();
    while (true) {
      c.send(proto::Sense{});
      if (c.expect<proto::WorldState>().state.termination) break;
      c.send(proto::Act{UnicycleCommand{1.2, 0}});
    }
    c.expect<proto::EpisodeEnd>();
    c.expect<proto::Bye>();
    return std::vector<proto::Error>{e1, e2, e3};
  });
  const auto result = serve_connection(world.library, world.episodes, lb.server_side, deterministic_options());
  const auto errors = client.get();
  EXPECT_TRUE(result.completed);
  for (const auto& e : errors) EXPECT_FALSE(e.fatal);
  EXPECT_NE(errors[0].reason.find("without a preceding sense"), std::string::npos);
  EXPECT_NE(errors[2].reason.find("malformed"), std::string::npos);
  EXPECT_EQ(result.logs[0].termination.kind, TerminationKind::kCompletion);
}

TEST(Session, PositionActsOverTheWire) {
  OpenWorld world;
  Loopback lb;
  auto client = std::async(std::launch::async, [&] {
    ScriptedClient c(lb.client_side);
    c.send(proto::Hello{1, "pos", ControlMode::kHolonomic, std::nullopt, std::nullopt});
    EXPECT_EQ(c.expect<proto::Hello>().control_mode, ControlMode::kHolonomic);
    c.expect<proto::EpisodeList>();
    const auto start = c.expect<proto::EpisodeStart>();
    while (true) {
      c.send(proto::Sense{});
      if (c.expect<proto::WorldState>().state.termination) break;
      c.send(proto::Act{proto::PositionTarget{start.goal}});
    }
    c.expect<proto::EpisodeEnd>();
    c.expect<proto::Bye>();
  });
  const auto result = serve_connection(world.library, world.episodes, lb.server_side, deterministic_options());
  client.get();
  ASSERT_TRUE(result.completed);
  const auto& log = result.logs[0];
  EXPECT_EQ(log.robot.control_mode, ControlMode::kHolonomic);
  // Each tick moves v_max * dt toward the goal until inside the goal radius.
  EXPECT_NEAR(distance(log.records[1].state.robot.position(), log.start.position()), 1.2 * 0.04, 1e-12);
  EXPECT_EQ(log.termination.kind, TerminationKind::kCompletion);
}

TEST(Session, SilentClientTimesOutAfterDeadline) {
  OpenWorld world;
  Loopback lb;
  auto options = deterministic_options();
  options.receive_deadline = 0.3;
  ScriptedClient c(lb.client_side);
  c.send(proto::Hello{1, "silent", std::nullopt, std::nullopt, std::nullopt});
  const auto result = serve_connection(world.library, world.episodes, lb.server_side, options);
  EXPECT_FALSE(result.completed);
  ASSERT_EQ(result.logs.size(), 1u);
  EXPECT_TRUE(result.logs[0].transport_failure);
  EXPECT_EQ(result.logs[0].termination.kind, TerminationKind::kTimeout);
}

TEST(Session, PolicyClientOverLoopbackSyncAndAsync) {
  auto lib = load_library(fixture::source_dir() / "data" / "crossing");
  std::vector<Episode> eps(lib.episodes.begin(), lib.episodes.begin() + 2);
  for (auto mode : {Synchronicity::kSynchronous, Synchronicity::kAsynchronous}) {
    Loopback lb;
    auto policy = make_policy("orca");
    auto client = std::async(std::launch::async, [&] { return run_policy_client(lb.client_side, *policy); });
    auto options = deterministic_options();
    options.mode = mode;
    options.wall_rate = 400.0;
    const auto result = serve_connection(lib, eps, lb.server_side, options);
    const auto outcomes = client.get();
    ASSERT_TRUE(result.completed) << result.error;
    ASSERT_EQ(outcomes.size(), eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
      EXPECT_EQ(outcomes[i].episode, eps[i].name);
      EXPECT_EQ(outcomes[i].termination, result.logs[i].termination);
      EXPECT_EQ(outcomes[i].metrics.at("ticks").get<std::int64_t>(), result.logs[i].records.back().state.tick);
    }
  }
}

TEST(Session, ServerErrorRelayedToPolicyClient) {
  Loopback lb;
  auto policy = make_policy("baseline");
  lb.server_side.write(proto::encode(proto::Error{"go away", true}));
  try {
    run_policy_client(lb.client_side, *policy);
    FAIL() << "error not relayed";
  } catch (const proto::ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("go away"), std::string::npos);
  }
}
