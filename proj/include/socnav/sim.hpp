#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "socnav/core.hpp"
#include "socnav/robot.hpp"

namespace socnav {

/// Raised by client handles when the connection drops or a receive deadline passes.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TerminationKind { kCompletion, kTimeout, kEnvironmentCollision };

std::string to_string(TerminationKind kind);
TerminationKind termination_kind_from_string(const std::string& s);

struct Termination {
  TerminationKind kind = TerminationKind::kTimeout;
  bool success = false;  // kind == Completion and no pedestrian collisions
  int pedestrian_collisions = 0;

  friend bool operator==(const Termination&, const Termination&) = default;
};

Termination make_termination(TerminationKind kind, int pedestrian_collisions);

struct SimState {
  double sim_time = 0.0;
  std::int64_t tick = 0;
  AgentState robot;
  std::vector<AgentState> pedestrians;
  std::optional<Termination> termination;

  friend bool operator==(const SimState&, const SimState&) = default;
};

enum class ContactKind { kPedestrian, kEnvironment };

struct Contact {
  ContactKind kind = ContactKind::kPedestrian;
  AgentId other = 0;  // pedestrian id; unused for environment contacts

  friend bool operator==(const Contact&, const Contact&) = default;
};

struct CollisionEvent {
  ContactKind kind = ContactKind::kPedestrian;
  AgentId other = 0;
  std::int64_t start_tick = 0;
  std::int64_t end_tick = 0;

  friend bool operator==(const CollisionEvent&, const CollisionEvent&) = default;
};

/// Pedestrian contact iff center distance < radius sum; environment contact iff a blocked cell
/// lies strictly within the robot radius.
std::vector<Contact> detect_collisions(const AgentState& robot,
                                       const std::vector<AgentState>& pedestrians,
                                       const EnvironmentMap& env);

/// Merges contiguous per-tick contacts with the same partner into single events.
class CollisionTracker {
 public:
  /// Ticks must be observed in increasing order.
  void observe(std::int64_t tick, const std::vector<Contact>& contacts);
  const std::vector<CollisionEvent>& events() const { return events_; }
  int pedestrian_event_count() const;

 private:
  std::vector<CollisionEvent> events_;
  std::vector<std::size_t> open_;  // indices into events_ still extending
  std::int64_t last_tick_ = -1;
};

std::vector<CollisionEvent> coalesce_collision_events(
    const std::vector<std::pair<std::int64_t, std::vector<Contact>>>& per_tick);

/// Replayed pedestrians present at `tick`.
std::vector<AgentState> pedestrians_at(const Episode& episode, std::int64_t tick);

struct TickRecord {
  SimState state;
  std::optional<VelocityCommand> command;  // applied to advance from this tick; empty on the last
  double planning_wait = 0.0;
  std::vector<Contact> contacts;

  friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

struct EpisodeLog {
  std::string episode;
  std::string environment;
  double tick_rate = 25.0;
  double time_budget = 60.0;
  Pose2D start;
  Vec2 goal;
  double goal_radius = 0.3;
  RobotSpec robot;
  std::vector<TickRecord> records;
  Termination termination;
  bool transport_failure = false;
  std::vector<CollisionEvent> collisions;
  double total_planning_wait = 0.0;

  double dt() const { return 1.0 / tick_rate; }
  friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

/// The tick loop for one episode. Pedestrian positions depend only on the tick index.
class Simulator {
 public:
  Simulator(const Episode& episode, const EnvironmentMap& env, RobotSpec robot);

  const SimState& state() const { return state_; }
  bool terminated() const { return state_.termination.has_value(); }
  const std::vector<Contact>& contacts() const { return contacts_; }
  const CollisionTracker& collisions() const { return tracker_; }

  /// Applies `command` for one tick and evaluates contacts and termination.
  /// Throws UsageError when the episode has already terminated.
  const SimState& advance(const VelocityCommand& command);
  /// Ends the episode early as a Timeout (client failure).
  void abort_as_timeout();

 private:
  void evaluate();

  const Episode& episode_;
  const EnvironmentMap& env_;
  RobotSpec robot_spec_;
  SimState state_;
  std::vector<Contact> contacts_;
  CollisionTracker tracker_;
};

/// Seconds from a monotonic source; injectable so timing can be disabled for reproducible logs.
using WallClock = std::function<double()>;
WallClock steady_wall_clock();
WallClock null_wall_clock();

struct RunOptions {
  RobotSpec robot;
  WallClock clock = steady_wall_clock();
};

/// Client driven in lock-step: one decision per tick.
class SyncClient {
 public:
  virtual ~SyncClient() = default;
  /// Returns the command for `state`. May throw TransportError.
  virtual VelocityCommand decide(const SimState& state) = 0;
};

/// Single-slot, latest-wins command store shared between a receive path and the tick thread.
class CommandMailbox {
 public:
  void post(const VelocityCommand& command);
  std::optional<VelocityCommand> latest() const;
  std::uint64_t post_count() const;

 private:
  mutable std::mutex mutex_;
  std::optional<VelocityCommand> command_;
  std::uint64_t posts_ = 0;
};

/// Publishes immutable snapshots of the most recent state.
class StateBoard {
 public:
  void publish(const SimState& state);
  std::shared_ptr<const SimState> latest() const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const SimState> state_;
};

/// Client running concurrently with a free-running simulator.
class AsyncClient {
 public:
  virtual ~AsyncClient() = default;
  virtual void start(CommandMailbox& mailbox, const StateBoard& board) = 0;
  /// Called on the tick thread after each published state.
  virtual void on_tick(const SimState&) {}
  virtual void stop() = 0;
  virtual bool failed() const { return false; }
};

EpisodeLog run_episode_synchronous(const Episode& episode, const EnvironmentMap& env,
                                   SyncClient& client, const RunOptions& options = {});

/// Advances one tick per 1/wall_rate seconds of wall time using the latest mailbox command
/// (zero until the first command arrives).
EpisodeLog run_episode_asynchronous(const Episode& episode, const EnvironmentMap& env,
                                    AsyncClient& client, double wall_rate,
                                    const RunOptions& options = {});

}  // namespace socnav
