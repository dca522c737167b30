#include "socnav/sim.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace socnav {

std::string to_string(TerminationKind kind) {
  switch (kind) {
    case TerminationKind::kCompletion:
      return "Completion";
    case TerminationKind::kTimeout:
      return "Timeout";
    case TerminationKind::kEnvironmentCollision:
      return "EnvironmentCollision";
  }
  return "Timeout";
}

TerminationKind termination_kind_from_string(const std::string& s) {
  if (s == "Completion") return TerminationKind::kCompletion;
  if (s == "Timeout") return TerminationKind::kTimeout;
  if (s == "EnvironmentCollision") return TerminationKind::kEnvironmentCollision;
  throw ParseError("unknown termination kind '" + s + "'");
}

Termination make_termination(TerminationKind kind, int pedestrian_collisions) {
  return {kind, kind == TerminationKind::kCompletion && pedestrian_collisions == 0,
          pedestrian_collisions};
}

std::vector<Contact> detect_collisions(const AgentState& robot,
                                       const std::vector<AgentState>& pedestrians,
                                       const EnvironmentMap& env) {
  std::vector<Contact> contacts;
  for (const auto& ped : pedestrians) {
    if (distance(robot.position(), ped.position()) < robot.radius + ped.radius) {
      contacts.push_back({ContactKind::kPedestrian, ped.id});
    }
  }
  if (env.disc_hits_obstacle(robot.position(), robot.radius)) {
    contacts.push_back({ContactKind::kEnvironment, 0});
  }
  return contacts;
}

void CollisionTracker::observe(std::int64_t tick, const std::vector<Contact>& contacts) {
  if (tick <= last_tick_) throw UsageError("contacts must be observed in increasing tick order");
  const bool contiguous = tick == last_tick_ + 1;
  std::vector<std::size_t> still_open;
  for (const auto& c : contacts) {
    auto match = std::find_if(open_.begin(), open_.end(), [&](std::size_t i) {
      return events_[i].kind == c.kind && events_[i].other == c.other;
    });
    if (contiguous && match != open_.end()) {
      events_[*match].end_tick = tick;
      still_open.push_back(*match);
    } else {
      events_.push_back({c.kind, c.other, tick, tick});
      still_open.push_back(events_.size() - 1);
    }
  }
  open_ = std::move(still_open);
  last_tick_ = tick;
}

int CollisionTracker::pedestrian_event_count() const {
  return static_cast<int>(std::count_if(events_.begin(), events_.end(), [](const CollisionEvent& e) {
    return e.kind == ContactKind::kPedestrian;
  }));
}

std::vector<CollisionEvent> coalesce_collision_events(
    const std::vector<std::pair<std::int64_t, std::vector<Contact>>>& per_tick) {
  CollisionTracker tracker;
  for (const auto& [tick, contacts] : per_tick) tracker.observe(tick, contacts);
  return tracker.events();
}

std::vector<AgentState> pedestrians_at(const Episode& episode, std::int64_t tick) {
  std::vector<AgentState> out;
  for (const auto& track : episode.tracks) {
    if (track.present_at(tick)) out.push_back(track.state_at(tick, episode.pedestrian_radius));
  }
  return out;
}

Simulator::Simulator(const Episode& episode, const EnvironmentMap& env, RobotSpec robot)
    : episode_(episode), env_(env), robot_spec_(robot) {
  if (!(episode.tick_rate > 0.0)) throw UsageError("tick rate must be positive");
  state_.robot.id = kRobotId;
  state_.robot.pose = episode.robot_start;
  state_.robot.radius = robot.radius;
  state_.pedestrians = pedestrians_at(episode_, 0);
  evaluate();
}

const SimState& Simulator::advance(const VelocityCommand& command) {
  if (terminated()) throw UsageError("advance called on a terminated episode");
  state_.robot = step_robot(state_.robot, command, episode_.dt(), robot_spec_);
  state_.tick += 1;
  state_.sim_time = static_cast<double>(state_.tick) / episode_.tick_rate;
  state_.pedestrians = pedestrians_at(episode_, state_.tick);
  evaluate();
  return state_;
}

void Simulator::evaluate() {
  contacts_ = detect_collisions(state_.robot, state_.pedestrians, env_);
  tracker_.observe(state_.tick, contacts_);
  const int peds = tracker_.pedestrian_event_count();
  const bool env_hit = std::any_of(contacts_.begin(), contacts_.end(), [](const Contact& c) {
    return c.kind == ContactKind::kEnvironment;
  });
  if (env_hit) {
    state_.termination = make_termination(TerminationKind::kEnvironmentCollision, peds);
  } else if (distance_to_goal(state_.robot, episode_.goal) <= episode_.goal_radius) {
    state_.termination = make_termination(TerminationKind::kCompletion, peds);
  } else if (state_.tick >= episode_.budget_ticks()) {
    state_.termination = make_termination(TerminationKind::kTimeout, peds);
  }
}

void Simulator::abort_as_timeout() {
  if (terminated()) return;
  state_.termination = make_termination(TerminationKind::kTimeout, tracker_.pedestrian_event_count());
}

WallClock steady_wall_clock() {
  return [] {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
}

WallClock null_wall_clock() {
  return [] { return 0.0; };
}

void CommandMailbox::post(const VelocityCommand& command) {
  std::lock_guard lock(mutex_);
  command_ = command;
  ++posts_;
}

std::optional<VelocityCommand> CommandMailbox::latest() const {
  std::lock_guard lock(mutex_);
  return command_;
}

std::uint64_t CommandMailbox::post_count() const {
  std::lock_guard lock(mutex_);
  return posts_;
}

void StateBoard::publish(const SimState& state) {
  auto snapshot = std::make_shared<const SimState>(state);
  std::lock_guard lock(mutex_);
  state_ = std::move(snapshot);
}

std::shared_ptr<const SimState> StateBoard::latest() const {
  std::lock_guard lock(mutex_);
  return state_;
}

namespace {

EpisodeLog open_log(const Episode& episode, const RobotSpec& robot) {
  EpisodeLog log;
  log.episode = episode.name;
  log.environment = episode.environment;
  log.tick_rate = episode.tick_rate;
  log.time_budget = episode.time_budget;
  log.start = episode.robot_start;
  log.goal = episode.goal;
  log.goal_radius = episode.goal_radius;
  log.robot = robot;
  return log;
}

void close_log(EpisodeLog& log, const Simulator& sim) {
  TickRecord last;
  last.state = sim.state();
  last.contacts = sim.contacts();
  log.records.push_back(std::move(last));
  log.termination = *sim.state().termination;
  log.collisions = sim.collisions().events();
  log.total_planning_wait = 0.0;
  for (const auto& r : log.records) log.total_planning_wait += r.planning_wait;
}

}  // namespace

EpisodeLog run_episode_synchronous(const Episode& episode, const EnvironmentMap& env,
                                   SyncClient& client, const RunOptions& options) {
  Simulator sim(episode, env, options.robot);
  EpisodeLog log = open_log(episode, options.robot);
  while (!sim.terminated()) {
    TickRecord record;
    record.state = sim.state();
    record.contacts = sim.contacts();
    const double t0 = options.clock();
    VelocityCommand command;
    try {
      command = client.decide(sim.state());
    } catch (const TransportError&) {
      log.transport_failure = true;
      sim.abort_as_timeout();
      break;
    }
    record.planning_wait = options.clock() - t0;
    record.command = command;
    log.records.push_back(std::move(record));
    sim.advance(command);
  }
  close_log(log, sim);
  return log;
}

EpisodeLog run_episode_asynchronous(const Episode& episode, const EnvironmentMap& env,
                                    AsyncClient& client, double wall_rate,
                                    const RunOptions& options) {
  if (!(wall_rate > 0.0)) throw UsageError("wall rate must be positive");
  Simulator sim(episode, env, options.robot);
  EpisodeLog log = open_log(episode, options.robot);
  CommandMailbox mailbox;
  StateBoard board;
  board.publish(sim.state());
  client.start(mailbox, board);
  client.on_tick(sim.state());

  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(1.0 / wall_rate));
  auto next = clock::now() + period;
  while (!sim.terminated()) {
    std::this_thread::sleep_until(next);
    next += period;
    if (client.failed()) {
      log.transport_failure = true;
      sim.abort_as_timeout();
      break;
    }
    const VelocityCommand command = mailbox.latest().value_or(zero_command(options.robot.control_mode));
    TickRecord record;
    record.state = sim.state();
    record.contacts = sim.contacts();
    record.command = command;
    log.records.push_back(std::move(record));
    sim.advance(command);
    board.publish(sim.state());
    client.on_tick(sim.state());
  }
  client.stop();
  close_log(log, sim);
  return log;
}

}  // namespace socnav
