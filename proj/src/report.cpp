#include "socnav/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "socnav/json_io.hpp"

namespace socnav {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::string format_mean_std(std::span<const double> values) {
  if (values.empty()) return "";
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.2f \xC2\xB1 %.2f", mean, sd);
  return buf;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

json metrics_to_json(const EpisodeMetrics& m, bool include_series) {
  json j = {{"episode", m.episode},
            {"termination", to_string(m.termination)},
            {"success", m.success},
            {"transport_failure", m.transport_failure},
            {"pedestrian_collisions", m.pedestrian_collisions},
            {"ticks", m.ticks},
            {"path_length", m.path_length},
            {"path_length_ratio", opt(m.path_length_ratio)},
            {"goal_traversal_ratio", opt(m.goal_traversal_ratio)},
            {"path_irregularity", opt(m.path_irregularity)},
            {"path_traversal_time", m.traversal_time},
            {"average_speed", opt(m.average_speed)},
            {"energy", opt(m.energy)},
            {"average_acceleration", opt(m.average_acceleration)},
            {"average_jerk", opt(m.average_jerk)},
            {"closest_pedestrian_distance_mean", m.cpd_mean},
            {"time_to_collision_mean", m.ttc_mean},
            {"planning_wait_mean", m.planning_wait_mean},
            {"planning_wait_total", m.planning_wait_total}};
  if (include_series) {
    j["closest_pedestrian_distance"] = m.cpd_series;
    j["time_to_collision"] = m.ttc_series;
  }
  return j;
}

EpisodeMetrics metrics_from_json(const json& j) {
  EpisodeMetrics m;
  m.episode = j.at("episode").get<std::string>();
  m.termination = termination_kind_from_string(j.at("termination").get<std::string>());
  m.success = j.at("success").get<bool>();
  m.transport_failure = j.at("transport_failure").get<bool>();
  m.pedestrian_collisions = j.at("pedestrian_collisions").get<int>();
  m.ticks = j.at("ticks").get<std::int64_t>();
  m.path_length = j.at("path_length").get<double>();
  m.path_length_ratio = opt_from(j, "path_length_ratio");
  m.goal_traversal_ratio = opt_from(j, "goal_traversal_ratio");
  m.path_irregularity = opt_from(j, "path_irregularity");
  m.traversal_time = j.at("path_traversal_time").get<double>();
  m.average_speed = opt_from(j, "average_speed");
  m.energy = opt_from(j, "energy");
  m.average_acceleration = opt_from(j, "average_acceleration");
  m.average_jerk = opt_from(j, "average_jerk");
  m.cpd_mean = j.at("closest_pedestrian_distance_mean").get<double>();
  m.ttc_mean = j.at("time_to_collision_mean").get<double>();
  m.planning_wait_mean = j.at("planning_wait_mean").get<double>();
  m.planning_wait_total = j.at("planning_wait_total").get<double>();
  if (j.contains("closest_pedestrian_distance")) {
    m.cpd_series = j["closest_pedestrian_distance"].get<std::vector<double>>();
  }
  if (j.contains("time_to_collision")) m.ttc_series = j["time_to_collision"].get<std::vector<double>>();
  return m;
}

json meta_to_json(const MetaReport& r) {
  return {{"episodes", r.episodes},
          {"successes", r.successes},
          {"success_rate", r.success_rate},
          {"failure_cases", r.failures.str()},
          {"timeouts", r.failures.timeout},
          {"pedestrian_collision_episodes", r.failures.pedestrian_collision},
          {"environment_collisions", r.failures.environment_collision},
          {"total_pedestrian_collisions", r.total_pedestrian_collisions},
          {"average_planning_wait", r.average_planning_wait}};
}

MetaReport meta_from_json(const json& j) {
  MetaReport r;
  r.episodes = j.at("episodes").get<int>();
  r.successes = j.at("successes").get<int>();
  r.success_rate = j.at("success_rate").get<double>();
  r.failures.timeout = j.at("timeouts").get<int>();
  r.failures.pedestrian_collision = j.at("pedestrian_collision_episodes").get<int>();
  r.failures.environment_collision = j.at("environment_collisions").get<int>();
  r.total_pedestrian_collisions = j.at("total_pedestrian_collisions").get<int>();
  r.average_planning_wait = j.at("average_planning_wait").get<double>();
  return r;
}

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = {
      "Candidate Algorithm",
      "Episode",
      "Termination",
      "Overall success rate",
      "Failure cases (T/PC/EC)",
      "Total pedestrian collisions",
      "Planning wall time per episode (s)",
      "Path length (m)",
      "Path length ratio",
      "Goal traversal ratio",
      "Path irregularity (radians)",
      "Path traversal time (s)",
      "Average speed (m/s)",
      "Average energy expenditure (J)",
      "Average acceleration (m/s^2)",
      "Average jerk (m/s^3)",
      "Closest pedestrian distance (m)",
      "Time to collision (s)",
  };
  return cols;
}

std::vector<std::vector<std::string>> summary_rows(const std::string& algorithm,
                                                   std::span<const EpisodeMetrics> episodes,
                                                   const MetaReport& meta) {
  std::vector<std::vector<std::string>> rows;
  auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; };
  for (const auto& m : episodes) {
    FailureTuple t;
    if (m.termination == TerminationKind::kTimeout) {
      t.timeout = 1;
    } else if (m.termination == TerminationKind::kEnvironmentCollision) {
      t.environment_collision = 1;
    } else if (m.pedestrian_collisions > 0) {
      t.pedestrian_collision = 1;
    }
    rows.push_back({algorithm,
                    m.episode,
                    to_string(m.termination),
                    m.success ? "1/1" : "0/1",
                    t.str(),
                    std::to_string(m.pedestrian_collisions),
                    format_number(m.planning_wait_total),
                    format_number(m.path_length),
                    cell(m.path_length_ratio),
                    cell(m.goal_traversal_ratio),
                    cell(m.path_irregularity),
                    format_number(m.traversal_time),
                    cell(m.average_speed),
                    cell(m.energy),
                    cell(m.average_acceleration),
                    cell(m.average_jerk),
                    format_number(m.cpd_mean),
                    format_number(m.ttc_mean)});
  }

  auto collect = [&](auto get) {
    std::vector<double> v;
    for (const auto& m : episodes) {
      if (auto x = get(m)) v.push_back(*x);
    }
    return format_mean_std(v);
  };
  auto plain = [](double EpisodeMetrics::*field) {
    return [field](const EpisodeMetrics& m) { return std::optional<double>(m.*field); };
  };
  auto optional = [](std::optional<double> EpisodeMetrics::*field) {
    return [field](const EpisodeMetrics& m) { return m.*field; };
  };
  rows.push_back({algorithm,
                  "ALL",
                  "",
                  std::to_string(meta.successes) + "/" + std::to_string(meta.episodes),
                  meta.failures.str(),
                  std::to_string(meta.total_pedestrian_collisions),
                  collect(plain(&EpisodeMetrics::planning_wait_total)),
                  collect(plain(&EpisodeMetrics::path_length)),
                  collect(optional(&EpisodeMetrics::path_length_ratio)),
                  collect(optional(&EpisodeMetrics::goal_traversal_ratio)),
                  collect(optional(&EpisodeMetrics::path_irregularity)),
                  collect(plain(&EpisodeMetrics::traversal_time)),
                  collect(optional(&EpisodeMetrics::average_speed)),
                  collect(optional(&EpisodeMetrics::energy)),
                  collect(optional(&EpisodeMetrics::average_acceleration)),
                  collect(optional(&EpisodeMetrics::average_jerk)),
                  collect(plain(&EpisodeMetrics::cpd_mean)),
                  collect(plain(&EpisodeMetrics::ttc_mean))});
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string write_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += csv_field(r[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

Histogram make_histogram(std::string metric, std::span<const double> values, double low, double high,
                         double bin_width) {
  if (!(bin_width > 0.0) || !(high > low)) throw UsageError("bad histogram range");
  Histogram h;
  h.metric = std::move(metric);
  h.low = low;
  h.bin_width = bin_width;
  const auto bins = static_cast<std::size_t>(std::ceil((high - low) / bin_width - 1e-12));
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::int64_t>(std::floor((v - low) / bin_width));
    b = std::clamp<std::int64_t>(b, 0, static_cast<std::int64_t>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw std::runtime_error("cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_reports(std::span<const EpisodeMetrics> episodes, const MetaReport& meta, const fs::path& out,
                   const std::string& algorithm) {
  if (episodes.empty()) throw UsageError("no episodes to report");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw std::runtime_error("cannot create output directory " + out.string());

  for (const auto& m : episodes) {
    write_text_file(out / m.episode / "metrics.json", metrics_to_json(m).dump(2) + "\n");
  }
  write_text_file(out / "summary.csv", write_csv(summary_columns(), summary_rows(algorithm, episodes, meta)));
  json mj = meta_to_json(meta);
  mj["algorithm"] = algorithm;
  write_text_file(out / "meta.json", mj.dump(2) + "\n");

  std::vector<double> cpd, ttc;
  for (const auto& m : episodes) {
    cpd.insert(cpd.end(), m.cpd_series.begin(), m.cpd_series.end());
    ttc.insert(ttc.end(), m.ttc_series.begin(), m.ttc_series.end());
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& h : {make_histogram("closest_pedestrian_distance", cpd, -1.0, kDistanceSaturation, 0.25),
                        make_histogram("time_to_collision", ttc, 0.0, kTtcSaturation, 0.25)}) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      const double lo = h.low + h.bin_width * static_cast<double>(i);
      rows.push_back({h.metric, format_number(lo), format_number(lo + h.bin_width), std::to_string(h.counts[i])});
    }
  }
  write_text_file(out / "histograms.csv", write_csv({"metric", "bin_low", "bin_high", "count"}, rows));
}

}  // namespace socnav
