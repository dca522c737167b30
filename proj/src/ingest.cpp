#include "socnav/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace socnav {

namespace {

constexpr double kTimeEps = 1e-9;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool parse_double(std::string_view token, double& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

Vec2 lerp(Vec2 a, Vec2 b, double s) { return a + (b - a) * s; }

Vec2 interpolate(std::span<const TimedPoint> samples, double t) {
  if (t <= samples.front().t) return samples.front().p;
  if (t >= samples.back().t) return samples.back().p;
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double v, const TimedPoint& s) { return v < s.t; });
  const TimedPoint& hi = *it;
  const TimedPoint& lo = *(it - 1);
  if (std::abs(t - lo.t) <= kTimeEps) return lo.p;
  if (std::abs(hi.t - t) <= kTimeEps) return hi.p;
  return lerp(lo.p, hi.p, (t - lo.t) / (hi.t - lo.t));
}

/// Portable uniform draws on top of mt19937_64 (std distributions are implementation-defined).
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

RawTrackFile parse_track_file(std::string_view text, double frame_rate) {
  if (!(frame_rate > 0.0)) throw UsageError("frame rate must be positive");
  RawTrackFile file;
  file.frame_rate = frame_rate;
  std::map<AgentId, std::int64_t> last_frame;
  std::set<std::pair<std::int64_t, AgentId>> seen;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != 4) {
      throw ParseError(where + "expected 4 columns (frame_id ped_id x y), got " +
                       std::to_string(fields.size()));
    }
    double v[4];
    for (int i = 0; i < 4; ++i) {
      if (!parse_double(fields[i], v[i])) {
        throw ParseError(where + "non-numeric field '" + std::string(fields[i]) + "'");
      }
    }
    if (v[0] != std::floor(v[0]) || v[1] != std::floor(v[1])) {
      throw ParseError(where + "frame and pedestrian ids must be integers");
    }
    RawTrackRow row{static_cast<std::int64_t>(v[0]), static_cast<AgentId>(v[1]), v[2], v[3],
                    line_no};
    if (!seen.insert({row.frame, row.pedestrian}).second) {
      throw ParseError(where + "duplicate observation for frame " + std::to_string(row.frame) +
                       ", pedestrian " + std::to_string(row.pedestrian));
    }
    if (auto it = last_frame.find(row.pedestrian);
        it != last_frame.end() && row.frame <= it->second) {
      throw ParseError(where + "frames for pedestrian " + std::to_string(row.pedestrian) +
                       " decrease");
    }
    last_frame[row.pedestrian] = row.frame;
    file.tracks[row.pedestrian].push_back(
        {static_cast<double>(row.frame) / frame_rate, Vec2{row.x, row.y}});
    file.rows.push_back(row);
  }
  return file;
}

PedestrianTrack resample_track(AgentId id, std::span<const TimedPoint> samples,
                               double tick_rate) {
  if (!(tick_rate > 0.0)) throw UsageError("tick rate must be positive");
  if (samples.size() < 2) {
    throw UsageError("pedestrian " + std::to_string(id) +
                     ": at least two samples are needed to define a velocity");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw UsageError("pedestrian " + std::to_string(id) + ": sample times must increase");
    }
  }

  PedestrianTrack track;
  track.id = id;
  track.entry_time = samples.front().t;
  track.exit_time = samples.back().t;
  track.first_tick = static_cast<std::int64_t>(std::ceil(track.entry_time * tick_rate - kTimeEps));
  const auto last_tick =
      static_cast<std::int64_t>(std::floor(track.exit_time * tick_rate + kTimeEps));
  if (last_tick < track.first_tick) return track;

  for (std::int64_t k = track.first_tick; k <= last_tick; ++k) {
    track.positions.push_back(interpolate(samples, static_cast<double>(k) / tick_rate));
  }

  const std::size_t n = track.positions.size();
  track.velocities.resize(n);
  if (n == 1) {
    // Only one tick inside the window: use the velocity of the segment containing it.
    const double t = static_cast<double>(track.first_tick) / tick_rate;
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const TimedPoint& s) { return v < s.t; });
    if (it == samples.end()) --it;
    if (it == samples.begin()) ++it;
    track.velocities[0] = (it->p - (it - 1)->p) / (it->t - (it - 1)->t);
  } else {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      track.velocities[i] = (track.positions[i + 1] - track.positions[i]) * tick_rate;
    }
    track.velocities[n - 1] = track.velocities[n - 2];
  }

  track.headings.resize(n);
  double heading = 0.0;
  auto first_moving = std::find_if(track.velocities.begin(), track.velocities.end(),
                                   [](Vec2 v) { return norm(v) > 1e-9; });
  if (first_moving != track.velocities.end()) heading = std::atan2(first_moving->y, first_moving->x);
  for (std::size_t i = 0; i < n; ++i) {
    if (norm(track.velocities[i]) > 1e-9) {
      heading = std::atan2(track.velocities[i].y, track.velocities[i].x);
    }
    track.headings[i] = heading;
  }
  return track;
}

EnvironmentMap parse_pgm(std::string_view bytes, std::string name, double resolution,
                         Vec2 origin) {
  std::size_t pos = 0;
  auto skip_ws_and_comments = [&] {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_ws_and_comments();
    long value = 0;
    auto [ptr, ec] = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), value);
    if (ec != std::errc() || value < 0) {
      throw ParseError("graymap '" + name + "': bad " + what);
    }
    pos = static_cast<std::size_t>(ptr - bytes.data());
    return value;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    throw ParseError("graymap '" + name + "': expected P5 or P2 header");
  }
  const bool binary = bytes[1] == '5';
  pos = 2;
  const long width = read_int("width");
  const long height = read_int("height");
  const long maxval = read_int("maxval");
  if (width <= 0 || height <= 0) throw ParseError("graymap '" + name + "': empty image");
  if (maxval <= 0 || maxval > 255) {
    throw ParseError("graymap '" + name + "': only 8-bit graymaps are supported");
  }

  const auto w = static_cast<std::size_t>(width);
  const auto h = static_cast<std::size_t>(height);
  std::vector<std::uint8_t> cells(w * h);
  if (binary) {
    ++pos;  // exactly one whitespace byte after maxval
    if (bytes.size() < pos + w * h) throw ParseError("graymap '" + name + "': truncated data");
  }
  for (std::size_t img_row = 0; img_row < h; ++img_row) {
    const std::size_t map_row = h - 1 - img_row;
    for (std::size_t col = 0; col < w; ++col) {
      long value;
      if (binary) {
        value = static_cast<unsigned char>(bytes[pos++]);
      } else {
        value = read_int("pixel");
      }
      cells[map_row * w + col] = value == maxval ? 1 : 0;
    }
  }
  return EnvironmentMap(std::move(name), static_cast<int>(width), static_cast<int>(height),
                        resolution, origin, std::move(cells));
}

EnvironmentMap load_environment(const std::filesystem::path& raster) {
  auto sidecar_path = raster;
  sidecar_path.replace_extension(".json");
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(read_file(sidecar_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("environment sidecar '" + sidecar_path.string() + "': " + e.what());
  }
  const std::string name = sidecar.value("name", raster.stem().string());
  try {
    const double resolution = sidecar.at("resolution").get<double>();
    const auto& origin = sidecar.at("origin");
    return parse_pgm(read_file(raster), name, resolution,
                     Vec2{origin.at(0).get<double>(), origin.at(1).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("environment sidecar '" + sidecar_path.string() + "': " + e.what());
  }
}

const EnvironmentMap& EpisodeLibrary::environment(const std::string& name) const {
  auto it = environments.find(name);
  if (it == environments.end()) throw ParseError("unknown environment '" + name + "'");
  return it->second;
}

std::vector<PedestrianTrack> load_section_tracks(const std::filesystem::path& root,
                                                 const TrackSection& section, double tick_rate,
                                                 AgentId id_offset) {
  const auto raw = parse_track_file(read_file(root / section.file), section.frame_rate);
  std::vector<PedestrianTrack> out;
  for (const auto& [id, samples] : raw.tracks) {
    // Clip to [t_start, t_end], adding interpolated boundary points, and shift to episode time.
    std::vector<TimedPoint> clipped;
    if (samples.back().t < section.t_start || samples.front().t > section.t_end) continue;
    if (samples.front().t < section.t_start) {
      clipped.push_back({section.t_start, interpolate(samples, section.t_start)});
    }
    for (const auto& s : samples) {
      if (s.t >= section.t_start && s.t <= section.t_end) clipped.push_back(s);
    }
    if (samples.back().t > section.t_end &&
        (clipped.empty() || clipped.back().t < section.t_end - kTimeEps)) {
      clipped.push_back({section.t_end, interpolate(samples, section.t_end)});
    }
    if (clipped.size() < 2) continue;
    for (auto& s : clipped) s.t -= section.t_start;
    auto track = resample_track(id + id_offset, clipped, tick_rate);
    if (!track.positions.empty()) out.push_back(std::move(track));
  }
  return out;
}

namespace {

Pose2D pose_from_json(const nlohmann::json& j) {
  return Pose2D(j.at("x").get<double>(), j.at("y").get<double>(), j.value("heading", 0.0));
}

}  // namespace

Episode episode_from_manifest(const nlohmann::json& manifest, const EpisodeLibrary& library) {
  Episode ep;
  try {
    ep.name = manifest.at("name").get<std::string>();
    ep.environment = manifest.at("environment").get<std::string>();
    ep.robot_start = pose_from_json(manifest.at("robot_start"));
    ep.goal = {manifest.at("goal").at("x").get<double>(), manifest.at("goal").at("y").get<double>()};
    ep.goal_radius = manifest.value("goal_radius", 0.3);
    ep.time_budget = manifest.value("time_budget", 60.0);
    ep.tick_rate = manifest.value("tick_rate", 25.0);
    ep.pedestrian_radius = manifest.value("pedestrian_radius", 0.3);
    for (const auto& s : manifest.value("pedestrians", nlohmann::json::array())) {
      ep.sections.push_back({s.at("file").get<std::string>(), s.at("frame_rate").get<double>(),
                             s.value("t_start", 0.0), s.value("t_end", ep.time_budget)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("episode manifest: " + std::string(e.what()));
  }
  const std::string where = "episode '" + ep.name + "': ";
  if (!(ep.tick_rate > 0.0)) throw ParseError(where + "tick rate must be positive");
  if (!(ep.time_budget > 0.0)) throw ParseError(where + "time budget must be positive");
  if (!(ep.goal_radius > 0.0) || !(ep.pedestrian_radius > 0.0)) {
    throw ParseError(where + "radii must be positive");
  }
  const auto& env = library.environment(ep.environment);
  if (!env.is_free_at(ep.robot_start.position())) throw ParseError(where + "start is blocked");
  if (!env.is_free_at(ep.goal)) throw ParseError(where + "goal is blocked");

  for (std::size_t i = 0; i < ep.sections.size(); ++i) {
    const auto& section = ep.sections[i];
    if (!(section.t_end > section.t_start)) throw ParseError(where + "empty pedestrian window");
    auto tracks = load_section_tracks(library.root, section, ep.tick_rate,
                                      static_cast<AgentId>(i) * 1'000'000);
    for (auto& t : tracks) ep.tracks.push_back(std::move(t));
  }
  return ep;
}

nlohmann::json episode_to_manifest(const Episode& ep) {
  nlohmann::json sections = nlohmann::json::array();
  for (const auto& s : ep.sections) {
    sections.push_back(
        {{"file", s.file}, {"frame_rate", s.frame_rate}, {"t_start", s.t_start}, {"t_end", s.t_end}});
  }
  return {{"name", ep.name},
          {"environment", ep.environment},
          {"robot_start", {{"x", ep.robot_start.x}, {"y", ep.robot_start.y}, {"heading", ep.robot_start.heading}}},
          {"goal", {{"x", ep.goal.x}, {"y", ep.goal.y}}},
          {"goal_radius", ep.goal_radius},
          {"time_budget", ep.time_budget},
          {"tick_rate", ep.tick_rate},
          {"pedestrian_radius", ep.pedestrian_radius},
          {"pedestrians", sections}};
}

EpisodeLibrary load_library(const std::filesystem::path& root) {
  EpisodeLibrary lib;
  lib.root = root;
  const auto env_dir = root / "environments";
  const auto ep_dir = root / "episodes";
  if (!std::filesystem::is_directory(env_dir) || !std::filesystem::is_directory(ep_dir)) {
    throw ParseError("'" + root.string() + "' is not an episode library (needs environments/ and episodes/)");
  }
  for (const auto& entry : std::filesystem::directory_iterator(env_dir)) {
    if (entry.path().extension() != ".pgm") continue;
    auto env = load_environment(entry.path());
    const std::string name = env.name();
    lib.environments.emplace(name, std::move(env));
  }
  std::vector<std::filesystem::path> manifests;
  for (const auto& entry : std::filesystem::directory_iterator(ep_dir)) {
    if (entry.path().extension() == ".json") manifests.push_back(entry.path());
  }
  std::sort(manifests.begin(), manifests.end());
  for (const auto& path : manifests) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("'" + path.string() + "': " + e.what());
    }
    lib.episodes.push_back(episode_from_manifest(doc, lib));
  }
  std::sort(lib.episodes.begin(), lib.episodes.end(),
            [](const Episode& a, const Episode& b) { return a.name < b.name; });
  return lib;
}

std::vector<int> label_free_components(const EnvironmentMap& env) {
  std::vector<int> labels(static_cast<std::size_t>(env.width()) * env.height(), -1);
  int next = 0;
  std::deque<std::pair<int, int>> queue;
  for (int r = 0; r < env.height(); ++r) {
    for (int c = 0; c < env.width(); ++c) {
      if (!env.is_free(c, r) || labels[env.index(c, r)] >= 0) continue;
      labels[env.index(c, r)] = next;
      queue.push_back({c, r});
      while (!queue.empty()) {
        auto [cc, rr] = queue.front();
        queue.pop_front();
        constexpr int dc[4] = {1, -1, 0, 0};
        constexpr int dr[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nc = cc + dc[k];
          const int nr = rr + dr[k];
          if (env.is_free(nc, nr) && labels[env.index(nc, nr)] < 0) {
            labels[env.index(nc, nr)] = next;
            queue.push_back({nc, nr});
          }
        }
      }
      ++next;
    }
  }
  return labels;
}

std::vector<Episode> sample_random_episodes(const EpisodeLibrary& library, std::size_t count,
                                            std::uint64_t seed, const SamplerOptions& options) {
  if (count < 1) throw UsageError("sample count must be at least 1");
  if (!(options.v_max > 0.0)) throw UsageError("v_max must be positive");

  // Environments that have recorded pedestrian sections, in name order.
  std::map<std::string, std::vector<const Episode*>> sources;
  for (const auto& ep : library.episodes) sources[ep.environment].push_back(&ep);
  if (sources.empty()) throw UsageError("episode library is empty");
  std::vector<std::string> env_names;
  for (const auto& [name, eps] : sources) env_names.push_back(name);

  struct EnvCache {
    std::vector<int> labels;
    std::vector<std::pair<int, int>> free_cells;
  };
  std::map<std::string, EnvCache> cache;
  for (const auto& name : env_names) {
    const auto& env = library.environment(name);
    EnvCache c;
    c.labels = label_free_components(env);
    for (int r = 0; r < env.height(); ++r) {
      for (int col = 0; col < env.width(); ++col) {
        if (env.is_free(col, r)) c.free_cells.push_back({col, r});
      }
    }
    cache.emplace(name, std::move(c));
  }

  const double max_distance = options.v_max * options.reach_time;
  PortableRng rng(seed);
  std::vector<Episode> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string& env_name = env_names[rng.index(env_names.size())];
    const auto& candidates = sources.at(env_name);
    const Episode& source = *candidates[rng.index(candidates.size())];
    const auto& env = library.environment(env_name);
    const auto& c = cache.at(env_name);

    bool found = false;
    for (int attempt = 0; attempt < options.max_attempts && !found; ++attempt) {
      const auto [sc, sr] = c.free_cells[rng.index(c.free_cells.size())];
      const auto [gc, gr] = c.free_cells[rng.index(c.free_cells.size())];
      const double heading = (2.0 * rng.uniform() - 1.0) * std::numbers::pi;
      const Vec2 start = env.cell_center(sc, sr);
      const Vec2 goal = env.cell_center(gc, gr);
      const double d = distance(start, goal);
      if (d < options.min_distance || d > max_distance) continue;
      if (c.labels[env.index(sc, sr)] != c.labels[env.index(gc, gr)]) continue;
      if (env.disc_hits_obstacle(start, options.robot_radius) ||
          env.disc_hits_obstacle(goal, options.robot_radius)) {
        continue;
      }
      Episode ep = source;
      ep.name = "sampled_" + std::to_string(seed) + "_" + std::to_string(i);
      ep.robot_start = Pose2D(start.x, start.y, heading);
      ep.goal = goal;
      out.push_back(std::move(ep));
      found = true;
    }
    if (!found) {
      throw UsageError("environment '" + env_name + "': no valid start/goal pair after " +
                       std::to_string(options.max_attempts) + " attempts");
    }
  }
  return out;
}

}  // namespace socnav
