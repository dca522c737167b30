#include "socnav/harness.hpp"

#include <algorithm>
#include <future>
#include <ostream>
#include <set>

#include "socnav/json_io.hpp"
#include "socnav/report.hpp"

namespace socnav {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void read(const json& j, const char* key, std::optional<double>& field) {
  if (!j.contains(key)) return;
  field = j.at(key).is_null() ? std::nullopt : std::optional<double>(j.at(key).get<double>());
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  std::set<std::string> names(known.begin(), known.end());
  for (const auto& [k, v] : j.items()) {
    if (!names.count(k)) throw ParseError(where + ": unknown key '" + k + "'");
  }
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

PlannerParams planner_params_from_json(const json& j) {
  PlannerParams p;
  reject_unknown(j, {"social_forces", "orca", "meta", "baseline"}, "planner_params");
  if (j.contains("social_forces")) {
    const auto& s = j["social_forces"];
    auto& o = p.social_forces;
    read(s, "relaxation_time", o.relaxation_time);
    read(s, "desired_speed", o.desired_speed);
    read(s, "pedestrian_strength", o.pedestrian_strength);
    read(s, "pedestrian_range", o.pedestrian_range);
    read(s, "obstacle_strength", o.obstacle_strength);
    read(s, "obstacle_range", o.obstacle_range);
    read(s, "obstacle_search", o.obstacle_search);
  }
  if (j.contains("orca")) {
    const auto& s = j["orca"];
    auto& o = p.orca;
    read(s, "horizon", o.horizon);
    read(s, "neighbor_range", o.neighbor_range);
    read(s, "robot_responsibility", o.robot_responsibility);
    read(s, "pedestrian_responsibility", o.pedestrian_responsibility);
    read(s, "safety_margin", o.safety_margin);
    read(s, "obstacle_horizon", o.obstacle_horizon);
    read(s, "obstacle_range", o.obstacle_range);
    read(s, "max_obstacle_cells", o.max_obstacle_cells);
  }
  if (j.contains("meta")) {
    const auto& s = j["meta"];
    auto& o = p.meta;
    read(s, "horizon", o.horizon);
    read(s, "replan_distance", o.replan_distance);
    read(s, "preferred_clearance", o.preferred_clearance);
    read(s, "clearance_weight", o.clearance_weight);
    read(s, "hard_margin", o.hard_margin);
  }
  if (j.contains("baseline")) read(j["baseline"], "heading_gain", p.baseline.heading_gain);
  return p;
}

json planner_params_to_json(const PlannerParams& p) {
  const auto& s = p.social_forces;
  const auto& o = p.orca;
  const auto& m = p.meta;
  return {{"social_forces",
           {{"relaxation_time", s.relaxation_time},
            {"desired_speed", opt(s.desired_speed)},
            {"pedestrian_strength", s.pedestrian_strength},
            {"pedestrian_range", s.pedestrian_range},
            {"obstacle_strength", s.obstacle_strength},
            {"obstacle_range", s.obstacle_range},
            {"obstacle_search", s.obstacle_search}}},
          {"orca",
           {{"horizon", o.horizon},
            {"neighbor_range", o.neighbor_range},
            {"robot_responsibility", o.robot_responsibility},
            {"pedestrian_responsibility", o.pedestrian_responsibility},
            {"safety_margin", o.safety_margin},
            {"obstacle_horizon", o.obstacle_horizon},
            {"obstacle_range", o.obstacle_range},
            {"max_obstacle_cells", o.max_obstacle_cells}}},
          {"meta",
           {{"horizon", m.horizon},
            {"replan_distance", m.replan_distance},
            {"preferred_clearance", m.preferred_clearance},
            {"clearance_weight", m.clearance_weight},
            {"hard_margin", m.hard_margin}}},
          {"baseline", {{"heading_gain", p.baseline.heading_gain}}}};
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

BenchmarkConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  reject_unknown(j,
                 {"episodes", "robot", "mode", "tick_rate", "wall_rate", "bind", "out", "planner",
                  "planner_params", "seed", "sample", "accept_timeout", "receive_deadline", "deterministic",
                  "frames", "pixels_per_meter", "trail_length"},
                 "config");
  BenchmarkConfig c;
  try {
    if (j.contains("episodes")) c.episodes = j["episodes"].get<std::string>();
    if (j.contains("robot")) c.robot = robot_spec_from_json(j["robot"], c.robot);
    if (j.contains("mode")) c.mode = synchronicity_from_string(j["mode"].get<std::string>());
    read(j, "tick_rate", c.tick_rate);
    read(j, "wall_rate", c.wall_rate);
    read(j, "bind", c.bind);
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    read(j, "planner", c.planner);
    if (j.contains("planner_params")) c.planner_params = planner_params_from_json(j["planner_params"]);
    read(j, "seed", c.seed);
    if (j.contains("sample") && !j["sample"].is_null()) c.sample = j["sample"].get<std::size_t>();
    read(j, "accept_timeout", c.accept_timeout);
    read(j, "receive_deadline", c.receive_deadline);
    read(j, "deterministic", c.deterministic);
    read(j, "frames", c.frames);
    read(j, "pixels_per_meter", c.frame_spec.pixels_per_meter);
    read(j, "trail_length", c.frame_spec.trail_length);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  } catch (const UsageError& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (c.tick_rate && !(*c.tick_rate > 0.0)) throw ParseError("config: tick_rate must be positive");
  if (!(c.wall_rate > 0.0)) throw ParseError("config: wall_rate must be positive");
  if (!(c.frame_spec.pixels_per_meter > 0.0)) throw ParseError("config: pixels_per_meter must be positive");
  return c;
}

json config_to_json(const BenchmarkConfig& c) {
  return {{"episodes", c.episodes.string()},
          {"robot", to_json(c.robot)},
          {"mode", to_string(c.mode)},
          {"tick_rate", opt(c.tick_rate)},
          {"wall_rate", c.wall_rate},
          {"bind", c.bind},
          {"out", c.out.string()},
          {"planner", c.planner},
          {"planner_params", planner_params_to_json(c.planner_params)},
          {"seed", c.seed},
          {"sample", c.sample ? json(*c.sample) : json(nullptr)},
          {"accept_timeout", c.accept_timeout},
          {"receive_deadline", c.receive_deadline},
          {"deterministic", c.deterministic},
          {"frames", c.frames},
          {"pixels_per_meter", c.frame_spec.pixels_per_meter},
          {"trail_length", c.frame_spec.trail_length}};
}

BenchmarkConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

Episode retime_episode(const Episode& episode, const EpisodeLibrary& library, double tick_rate) {
  if (episode.tick_rate == tick_rate) return episode;
  json m = episode_to_manifest(episode);
  m["tick_rate"] = tick_rate;
  return episode_from_manifest(m, library);
}

std::vector<Episode> select_episodes(const BenchmarkConfig& config, const EpisodeLibrary& library) {
  std::vector<Episode> eps;
  if (config.sample) {
    SamplerOptions opts;
    opts.v_max = config.robot.v_max;
    opts.robot_radius = config.robot.radius;
    eps = sample_random_episodes(library, *config.sample, config.seed, opts);
  } else {
    eps = library.episodes;
  }
  if (config.tick_rate) {
    for (auto& e : eps) e = retime_episode(e, library, *config.tick_rate);
  }
  if (eps.empty()) throw UsageError("no episodes selected from '" + library.root.string() + "'");
  return eps;
}

json provenance(const BenchmarkConfig& config, const EpisodeLibrary& library) {
  json cfg = config_to_json(config);
  json envs = json::object();
  for (const auto& [name, env] : library.environments) envs[name] = env.digest();
  return {{"tool", "socnavbench"},
          {"version", kToolVersion},
          {"compiler", __VERSION__},
          {"config", cfg},
          {"config_digest", fnv1a_hex(cfg.dump())},
          {"seed", config.seed},
          {"environments", envs}};
}

RunResult run_benchmark(const BenchmarkConfig& config, std::ostream* progress) {
  const EpisodeLibrary library = load_library(config.episodes);
  const std::vector<Episode> episodes = select_episodes(config, library);
  fs::create_directories(config.out);
  write_text_file(config.out / "provenance.json", provenance(config, library).dump(2) + "\n");

  ServeOptions opts;
  opts.mode = config.mode;
  opts.wall_rate = config.wall_rate;
  opts.robot = config.robot;
  opts.receive_deadline = config.receive_deadline;
  if (config.deterministic) opts.clock = null_wall_clock();
  opts.on_episode = [&](const EpisodeLog& log) {
    write_text_file(config.out / log.episode / "log.jsonl", episode_log_to_jsonl(log));
    if (progress) {
      *progress << log.episode << ": " << to_string(log.termination.kind)
                << (log.termination.success ? " (success)" : "")
                << ", pedestrian collisions " << log.termination.pedestrian_collisions << "\n";
    }
  };

  RunResult result;
  if (config.planner == "external") {
    Listener listener(parse_address(config.bind));
    if (progress) *progress << "waiting for a client on " << listener.address().str() << "\n";
    result.session = serve(library, episodes, listener, opts, config.accept_timeout);
  } else {
    auto policy = make_policy(config.planner, config.planner_params);
    Listener listener(parse_address("127.0.0.1:0"));
    const Address addr = listener.address();
    auto client = std::async(std::launch::async, [&policy, addr, deadline = config.receive_deadline] {
      Connection conn = connect_to(addr);
      ClientOptions co;
      co.agent = policy->name();
      co.receive_deadline = deadline;
      return run_policy_client(conn, *policy, co);
    });
    try {
      result.session = serve(library, episodes, listener, opts, config.accept_timeout);
    } catch (...) {
      try {
        client.get();
      } catch (...) {
      }
      throw;
    }
    client.get();
  }

  result.logs = result.session.logs;
  for (const auto& log : result.logs) result.metrics.push_back(compute_episode_metrics(log));
  if (!result.logs.empty()) {
    result.meta = aggregate_meta(result.logs);
    const std::string algorithm = config.planner == "external" ? result.session.agent : config.planner;
    write_reports(result.metrics, *result.meta, config.out, algorithm);
  }
  if (config.frames) {
    for (const auto& log : result.logs) {
      render_episode_frames(log, library.environment(log.environment), config.frame_spec,
                            config.out / log.episode / "frames");
    }
  }
  return result;
}

std::vector<EpisodeLog> load_logs(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "log.jsonl")) paths.push_back(entry.path() / "log.jsonl");
  }
  std::sort(paths.begin(), paths.end());
  std::vector<EpisodeLog> logs;
  for (const auto& p : paths) {
    try {
      logs.push_back(episode_log_from_jsonl(read_text_file(p)));
    } catch (const ParseError& e) {
      throw ParseError(p.string() + ": " + e.what());
    }
  }
  return logs;
}

}  // namespace socnav
