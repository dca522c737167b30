#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "socnav/metrics.hpp"

namespace socnav {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);
/// "m ± s" with two decimals; sample standard deviation (0 for a single value).
std::string format_mean_std(std::span<const double> values);

nlohmann::json metrics_to_json(const EpisodeMetrics& m, bool include_series = true);
EpisodeMetrics metrics_from_json(const nlohmann::json& j);
nlohmann::json meta_to_json(const MetaReport& r);
MetaReport meta_from_json(const nlohmann::json& j);

/// Column names of summary.csv, in order.
const std::vector<std::string>& summary_columns();
/// One row per episode followed by an aggregate row whose episode cell is "ALL".
std::vector<std::vector<std::string>> summary_rows(const std::string& algorithm,
                                                   std::span<const EpisodeMetrics> episodes,
                                                   const MetaReport& meta);

std::string write_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);
/// Parses RFC 4180 text; the first record is returned as the header.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

struct Histogram {
  std::string metric;
  double bin_width = 0.25;
  double low = 0.0;
  std::vector<std::int64_t> counts;
};
/// Values outside [low, low + width·bins) are clamped into the end bins.
Histogram make_histogram(std::string metric, std::span<const double> values, double low, double high,
                         double bin_width);

/// Writes `<out>/<episode>/metrics.json`, `<out>/summary.csv`, `<out>/meta.json` and
/// `<out>/histograms.csv`. Throws UsageError for an empty list, before touching the disk.
void write_reports(std::span<const EpisodeMetrics> episodes, const MetaReport& meta,
                   const std::filesystem::path& out, const std::string& algorithm);

/// Writes `text` to `path` atomically enough for our purposes: temp file, then rename.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace socnav
