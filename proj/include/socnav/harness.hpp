#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "socnav/ingest.hpp"
#include "socnav/metrics.hpp"
#include "socnav/policies.hpp"
#include "socnav/render.hpp"
#include "socnav/server.hpp"

namespace socnav {

inline constexpr const char* kToolVersion = "0.1.0";

struct BenchmarkConfig {
  std::filesystem::path episodes = "data/demo";
  RobotSpec robot;
  Synchronicity mode = Synchronicity::kSynchronous;
  std::optional<double> tick_rate;  // overrides every manifest when set
  double wall_rate = 25.0;
  std::string bind = "127.0.0.1:6400";
  std::filesystem::path out = "out";
  std::string planner = "baseline";  // or "external"
  PlannerParams planner_params;
  std::uint64_t seed = 0;
  std::optional<std::size_t> sample;  // run this many sampled episodes instead of the library's
  double accept_timeout = 60.0;
  double receive_deadline = 30.0;
  bool deterministic = false;  // record zero planning wait so logs are byte-stable
  bool frames = false;
  FrameSpec frame_spec;
};

/// Missing keys keep their defaults; unknown keys are rejected.
BenchmarkConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const BenchmarkConfig& c);
BenchmarkConfig load_config(const std::filesystem::path& path);

/// Library episodes (or sampled ones), retimed to the configured tick rate.
std::vector<Episode> select_episodes(const BenchmarkConfig& config, const EpisodeLibrary& library);
Episode retime_episode(const Episode& episode, const EpisodeLibrary& library, double tick_rate);

struct RunResult {
  std::vector<EpisodeLog> logs;
  std::vector<EpisodeMetrics> metrics;
  std::optional<MetaReport> meta;
  SessionResult session;
};

/// Serves the selected episodes to the configured planner and writes logs, reports, provenance and
/// optional frames under `config.out`. Bundled planners connect over loopback.
RunResult run_benchmark(const BenchmarkConfig& config, std::ostream* progress = nullptr);

/// Re-reads `<dir>/*/log.jsonl` (sorted by episode directory).
std::vector<EpisodeLog> load_logs(const std::filesystem::path& dir);

nlohmann::json provenance(const BenchmarkConfig& config, const EpisodeLibrary& library);

}  // namespace socnav
