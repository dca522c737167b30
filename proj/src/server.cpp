#include "socnav/server.hpp"

#include <atomic>
#include <chrono>
#include <map>
#include <thread>

#include "socnav/json_io.hpp"
#include "socnav/metrics.hpp"
#include "socnav/report.hpp"

namespace socnav {

namespace proto = protocol;

std::string to_string(Synchronicity s) {
  return s == Synchronicity::kSynchronous ? "sync" : "async";
}

Synchronicity synchronicity_from_string(const std::string& s) {
  if (s == "sync" || s == "synchronous") return Synchronicity::kSynchronous;
  if (s == "async" || s == "asynchronous") return Synchronicity::kAsynchronous;
  throw UsageError("unknown mode '" + s + "' (expected sync or async)");
}

namespace {

/// Line-level plumbing shared by the session and its client adapters.
class Channel {
 public:
  Channel(Connection& conn, const ServeOptions& options) : conn_(conn), options_(options) {}

  void send(const proto::Message& m) {
    const std::string line = proto::encode(m);
    if (options_.transcript) options_.transcript->push_back("> " + line.substr(0, line.size() - 1));
    conn_.write(line);
  }

  /// Next well-formed message. Malformed lines get a non-fatal error reply.
  proto::Message receive() {
    while (true) {
      auto line = conn_.read_line(options_.receive_deadline);
      if (!line) throw TransportError("client disconnected");
      if (options_.transcript) options_.transcript->push_back("< " + *line);
      try {
        return proto::decode(*line);
      } catch (const proto::ProtocolError& e) {
        send(proto::Error{e.what(), false});
      }
    }
  }

  bool readable(double timeout_s) { return conn_.wait_readable(timeout_s); }

 private:
  Connection& conn_;
  const ServeOptions& options_;
};

class NetSyncClient final : public SyncClient {
 public:
  NetSyncClient(Channel& channel, const EnvironmentMap& env, ControlMode mode, double dt)
      : channel_(channel), env_(env), mode_(mode), dt_(dt) {}

  VelocityCommand decide(const SimState& state) override {
    bool sensed = false;
    while (true) {
      const proto::Message m = channel_.receive();
      if (std::holds_alternative<proto::Sense>(m)) {
        channel_.send(proto::WorldState{state});
        sensed = true;
      } else if (const auto* act = std::get_if<proto::Act>(&m)) {
        if (!sensed) {
          channel_.send(proto::Error{"act without a preceding sense", false});
          continue;
        }
        try {
          return proto::resolve_act(act->command, state.robot, dt_, mode_);
        } catch (const proto::ProtocolError& e) {
          channel_.send(proto::Error{e.what(), false});
        }
      } else if (std::holds_alternative<proto::GetMap>(m)) {
        channel_.send(proto::map_data(env_));
      } else if (std::holds_alternative<proto::Bye>(m)) {
        throw TransportError("client left mid-episode");
      } else {
        channel_.send(proto::Error{"unexpected '" + proto::type_name(m) + "' during an episode", false});
      }
    }
  }

 private:
  Channel& channel_;
  const EnvironmentMap& env_;
  ControlMode mode_;
  double dt_;
};

class NetAsyncClient final : public AsyncClient {
 public:
  NetAsyncClient(Channel& channel, const EnvironmentMap& env, ControlMode mode, double dt,
                 double deadline)
      : channel_(channel), env_(env), mode_(mode), dt_(dt), deadline_(deadline) {}
  ~NetAsyncClient() override { stop(); }

  void start(CommandMailbox& mailbox, const StateBoard& board) override {
    thread_ = std::thread([this, &mailbox, &board] { loop(mailbox, board); });
  }

  void stop() override {
    stop_ = true;
    if (thread_.joinable()) thread_.join();
  }

  bool failed() const override { return failed_; }
  bool sent_terminal_state() const { return sent_terminal_; }
  bool client_left() const { return left_; }

 private:
  void loop(CommandMailbox& mailbox, const StateBoard& board) {
    using clock = std::chrono::steady_clock;
    auto last = clock::now();
    try {
      while (!stop_) {
        if (!channel_.readable(0.01)) {
          if (std::chrono::duration<double>(clock::now() - last).count() > deadline_) {
            failed_ = true;
            return;
          }
          continue;
        }
        const proto::Message m = channel_.receive();
        last = clock::now();
        const auto state = board.latest();
        if (std::holds_alternative<proto::Sense>(m)) {
          channel_.send(proto::WorldState{*state});
          if (state->termination) {
            sent_terminal_ = true;
            return;
          }
        } else if (const auto* act = std::get_if<proto::Act>(&m)) {
          if (state->termination) continue;
          try {
            mailbox.post(proto::resolve_act(act->command, state->robot, dt_, mode_));
          } catch (const proto::ProtocolError& e) {
            channel_.send(proto::Error{e.what(), false});
          }
        } else if (std::holds_alternative<proto::GetMap>(m)) {
          channel_.send(proto::map_data(env_));
        } else if (std::holds_alternative<proto::Bye>(m)) {
          left_ = true;
          failed_ = true;
          return;
        } else {
          channel_.send(proto::Error{"unexpected '" + proto::type_name(m) + "' during an episode", false});
        }
      }
    } catch (const TransportError&) {
      failed_ = true;
    }
  }

  Channel& channel_;
  const EnvironmentMap& env_;
  ControlMode mode_;
  double dt_;
  double deadline_;
  std::thread thread_;
  std::atomic<bool> stop_{false};
  std::atomic<bool> failed_{false};
  std::atomic<bool> sent_terminal_{false};
  std::atomic<bool> left_{false};
};

/// After termination the client learns the outcome from its next sense.
void await_final_sense(Channel& channel, const EnvironmentMap& env, const SimState& final_state,
                       bool async) {
  while (true) {
    const proto::Message m = channel.receive();
    if (std::holds_alternative<proto::Sense>(m)) {
      channel.send(proto::WorldState{final_state});
      return;
    }
    if (std::holds_alternative<proto::GetMap>(m)) {
      channel.send(proto::map_data(env));
    } else if (std::holds_alternative<proto::Act>(m)) {
      if (!async) channel.send(proto::Error{"episode already terminated; sense to receive the outcome", false});
    } else if (std::holds_alternative<proto::Bye>(m)) {
      throw TransportError("client left");
    } else {
      channel.send(proto::Error{"unexpected '" + proto::type_name(m) + "' after termination", false});
    }
  }
}

}  // namespace

SessionResult serve_connection(const EpisodeLibrary& library, const std::vector<Episode>& episodes,
                               Connection& conn, const ServeOptions& options) {
  if (episodes.empty()) throw UsageError("no episodes to serve");
  SessionResult result;
  Channel channel(conn, options);

  // Handshake: the client speaks first.
  auto line = conn.read_line(options.receive_deadline);
  if (!line) throw TransportError("client disconnected before hello");
  if (options.transcript) options.transcript->push_back("< " + *line);
  proto::Hello hello;
  try {
    const proto::Message m = proto::decode(*line);
    if (!std::holds_alternative<proto::Hello>(m)) throw proto::ProtocolError("expected hello first");
    hello = std::get<proto::Hello>(m);
  } catch (const proto::ProtocolError& e) {
    channel.send(proto::Error{e.what(), true});
    throw;
  }
  result.agent = hello.agent;
  RobotSpec robot = options.robot;
  if (hello.control_mode) robot.control_mode = *hello.control_mode;
  const bool async = options.mode == Synchronicity::kAsynchronous;

  proto::Hello reply;
  reply.agent = options.server_name;
  reply.control_mode = robot.control_mode;
  reply.mode = to_string(options.mode);
  reply.robot = robot;
  channel.send(reply);

  proto::EpisodeList list;
  for (const auto& e : episodes) list.episodes.push_back({e.name, e.environment, e.time_budget, e.tick_rate});
  channel.send(list);

  RunOptions run;
  run.robot = robot;
  run.clock = async ? null_wall_clock() : options.clock;

  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const Episode& ep = episodes[i];
    const EnvironmentMap& env = library.environment(ep.environment);
    proto::EpisodeStart start;
    start.index = static_cast<int>(i);
    start.name = ep.name;
    start.environment = proto::map_ref(env);
    start.time_budget = ep.time_budget;
    start.tick_rate = ep.tick_rate;
    start.start = ep.robot_start;
    start.goal = ep.goal;
    start.goal_radius = ep.goal_radius;
    start.robot = robot;
    try {
      channel.send(start);
    } catch (const TransportError& e) {
      result.error = e.what();
      return result;
    }

    EpisodeLog log;
    bool final_sent = false;
    bool left = false;
    if (async) {
      NetAsyncClient client(channel, env, robot.control_mode, ep.dt(), options.receive_deadline);
      log = run_episode_asynchronous(ep, env, client, options.wall_rate, run);
      final_sent = client.sent_terminal_state();
      left = client.client_left();
    } else {
      NetSyncClient client(channel, env, robot.control_mode, ep.dt());
      log = run_episode_synchronous(ep, env, client, run);
    }
    result.logs.push_back(log);
    if (options.on_episode) options.on_episode(log);
    if (log.transport_failure) {
      result.error = left ? "client left mid-episode" : "client failed during episode '" + ep.name + "'";
      return result;
    }

    try {
      if (!final_sent) await_final_sense(channel, env, log.records.back().state, async);
      proto::EpisodeEnd end;
      end.name = ep.name;
      end.termination = log.termination;
      end.metrics = metrics_to_json(compute_episode_metrics(log), false);
      channel.send(end);
    } catch (const TransportError& e) {
      result.error = e.what();
      return result;
    }
  }
  try {
    channel.send(proto::Bye{});
    result.completed = true;
  } catch (const TransportError& e) {
    result.error = e.what();
  }
  return result;
}

SessionResult serve(const EpisodeLibrary& library, const std::vector<Episode>& episodes, Listener& listener,
                    const ServeOptions& options, double accept_timeout) {
  Connection conn = listener.accept(accept_timeout);
  return serve_connection(library, episodes, conn, options);
}

namespace {

class ClientChannel {
 public:
  ClientChannel(Connection& conn, double deadline) : conn_(conn), deadline_(deadline) {}
  void send(const proto::Message& m) { conn_.write(proto::encode(m)); }
  proto::Message receive() {
    auto line = conn_.read_line(deadline_);
    if (!line) throw TransportError("server closed the connection");
    proto::Message m = proto::decode(*line);
    if (const auto* e = std::get_if<proto::Error>(&m)) {
      throw proto::ProtocolError("server error: " + e->reason);
    }
    return m;
  }
  template <class T>
  T expect() {
    proto::Message m = receive();
    if (auto* v = std::get_if<T>(&m)) return std::move(*v);
    throw proto::ProtocolError("unexpected '" + proto::type_name(m) + "' from server");
  }

 private:
  Connection& conn_;
  double deadline_;
};

proto::ActCommand to_act(const VelocityCommand& c) {
  if (const auto* u = std::get_if<UnicycleCommand>(&c)) return *u;
  return std::get<HolonomicCommand>(c);
}

}  // namespace

std::vector<ClientOutcome> run_policy_client(Connection& conn, Policy& policy, const ClientOptions& options) {
  ClientChannel ch(conn, options.receive_deadline);
  proto::Hello hello;
  hello.agent = options.agent;
  hello.control_mode = policy.control_mode();
  ch.send(hello);
  ch.expect<proto::Hello>();
  ch.expect<proto::EpisodeList>();

  std::map<std::string, EnvironmentMap> maps;
  std::vector<ClientOutcome> outcomes;
  while (true) {
    proto::Message m = ch.receive();
    if (std::holds_alternative<proto::Bye>(m)) break;
    const auto* start = std::get_if<proto::EpisodeStart>(&m);
    if (!start) throw proto::ProtocolError("unexpected '" + proto::type_name(m) + "' between episodes");

    auto it = maps.find(start->environment.digest);
    if (it == maps.end()) {
      ch.send(proto::GetMap{});
      const auto data = ch.expect<proto::MapData>();
      it = maps.emplace(start->environment.digest, proto::environment_from_map_data(data)).first;
    }
    EpisodeBrief brief{start->name,        start->start,     start->goal, start->goal_radius,
                       start->time_budget, start->tick_rate, start->robot};
    policy.begin(brief, it->second);
    while (true) {
      ch.send(proto::Sense{});
      const auto world = ch.expect<proto::WorldState>();
      if (world.state.termination) {
        const auto end = ch.expect<proto::EpisodeEnd>();
        outcomes.push_back({end.name, end.termination, end.metrics});
        break;
      }
      ch.send(proto::Act{to_act(policy.act(world.state))});
    }
  }
  return outcomes;
}

}  // namespace socnav
