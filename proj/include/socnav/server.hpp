#pragma once

#include <functional>
#include <string>
#include <vector>

#include "socnav/ingest.hpp"
#include "socnav/policies.hpp"
#include "socnav/protocol.hpp"
#include "socnav/sim.hpp"
#include "socnav/transport.hpp"

namespace socnav {

enum class Synchronicity { kSynchronous, kAsynchronous };
std::string to_string(Synchronicity s);
/// Accepts "sync"/"synchronous" and "async"/"asynchronous".
Synchronicity synchronicity_from_string(const std::string& s);

struct ServeOptions {
  Synchronicity mode = Synchronicity::kSynchronous;
  double wall_rate = 25.0;
  RobotSpec robot;
  double receive_deadline = 30.0;
  WallClock clock = steady_wall_clock();
  std::string server_name = "socnavbench";
  /// Called after each finished episode, before episode_end is sent.
  std::function<void(const EpisodeLog&)> on_episode;
  /// When set, every line sent or received is appended here ("> " sent, "< " received).
  std::vector<std::string>* transcript = nullptr;
};

struct SessionResult {
  std::string agent;
  std::vector<EpisodeLog> logs;
  bool completed = false;  // every episode served and bye sent
  std::string error;
};

/// Runs one client session over `conn`: hello, episode_list, each episode, bye.
/// Throws protocol::ProtocolError when the handshake fails.
SessionResult serve_connection(const EpisodeLibrary& library, const std::vector<Episode>& episodes,
                               Connection& conn, const ServeOptions& options);

/// Accepts one client on `listener` and serves it.
SessionResult serve(const EpisodeLibrary& library, const std::vector<Episode>& episodes,
                    Listener& listener, const ServeOptions& options, double accept_timeout);

struct ClientOptions {
  std::string agent = "socnav-planner";
  double receive_deadline = 30.0;
};

struct ClientOutcome {
  std::string episode;
  Termination termination;
  nlohmann::json metrics;
};

/// Plays every served episode with `policy`; returns after the server says bye.
std::vector<ClientOutcome> run_policy_client(Connection& conn, Policy& policy,
                                             const ClientOptions& options = {});

}  // namespace socnav
