#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "socnav/core.hpp"

namespace socnav {

struct TimedPoint {
  double t = 0.0;
  Vec2 p;
};

struct RawTrackRow {
  std::int64_t frame = 0;
  AgentId pedestrian = 0;
  double x = 0.0;
  double y = 0.0;
  int line = 0;
};

/// Rows of a `frame_id ped_id x y` track file, grouped per pedestrian.
struct RawTrackFile {
  double frame_rate = 25.0;
  std::vector<RawTrackRow> rows;
  /// Samples per pedestrian id, ordered by frame, times in seconds (frame / frame_rate).
  std::map<AgentId, std::vector<TimedPoint>> tracks;
};

RawTrackFile parse_track_file(std::string_view text, double frame_rate);

/// Linear interpolation of `samples` onto the tick grid t = k / tick_rate.
/// Velocities are forward differences of the interpolated positions (backward on the last tick).
PedestrianTrack resample_track(AgentId id, std::span<const TimedPoint> samples, double tick_rate);

/// Parses a binary (P5) or ASCII (P2) graymap; a cell is free only at the maximum gray value.
EnvironmentMap parse_pgm(std::string_view bytes, std::string name, double resolution, Vec2 origin);
/// Loads `<stem>.pgm` together with its `<stem>.json` sidecar (resolution, origin).
EnvironmentMap load_environment(const std::filesystem::path& raster);

struct EpisodeLibrary {
  std::filesystem::path root;
  std::map<std::string, EnvironmentMap> environments;
  std::vector<Episode> episodes;

  const EnvironmentMap& environment(const std::string& name) const;
};

/// Reads `<root>/environments/*.pgm` and `<root>/episodes/*.json`; episodes sorted by name.
EpisodeLibrary load_library(const std::filesystem::path& root);
Episode episode_from_manifest(const nlohmann::json& manifest, const EpisodeLibrary& library);
nlohmann::json episode_to_manifest(const Episode& episode);
/// Clips every track in `section` to its time window and resamples onto the tick grid.
std::vector<PedestrianTrack> load_section_tracks(const std::filesystem::path& root,
                                                 const TrackSection& section, double tick_rate,
                                                 AgentId id_offset);

struct SamplerOptions {
  double v_max = 1.2;
  double reach_time = 25.0;
  double robot_radius = 0.23;
  double min_distance = 1.0;
  int max_attempts = 1000;
};

/// Seeded, platform-independent start/goal sampling over the library's environments.
std::vector<Episode> sample_random_episodes(const EpisodeLibrary& library, std::size_t count,
                                            std::uint64_t seed, const SamplerOptions& options = {});

/// Connected-component labels of free cells under 4-connectivity; -1 for blocked cells.
std::vector<int> label_free_components(const EnvironmentMap& env);

}  // namespace socnav
