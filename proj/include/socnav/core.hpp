#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "socnav/geometry.hpp"

namespace socnav {

/// Raised for malformed input documents (track files, rasters, manifests, logs).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an operation is called outside its contract.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using AgentId = std::int64_t;
inline constexpr AgentId kRobotId = -1;

struct Pose2D {
  Pose2D() = default;
  Pose2D(double x_, double y_, double heading_) : x(x_), y(y_), heading(normalize_angle(heading_)) {}

  Vec2 position() const { return {x, y}; }

  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]

  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

struct AgentState {
  AgentId id = 0;
  Pose2D pose;
  Vec2 velocity;
  double radius = 0.3;

  Vec2 position() const { return pose.position(); }

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// 2D traversability raster. Cell (col, row) covers
/// [origin.x + col*res, origin.x + (col+1)*res) x [origin.y + row*res, ...), row 0 at the bottom.
class EnvironmentMap {
 public:
  EnvironmentMap() = default;
  /// `free_cells` is row-major with row 0 at the bottom; nonzero means traversable.
  EnvironmentMap(std::string name, int width, int height, double resolution, Vec2 origin,
                 std::vector<std::uint8_t> free_cells);

  const std::string& name() const { return name_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  Vec2 origin() const { return origin_; }
  Vec2 extent() const { return {width_ * resolution_, height_ * resolution_}; }

  bool in_bounds(int col, int row) const {
    return col >= 0 && row >= 0 && col < width_ && row < height_;
  }
  /// Out-of-bounds cells are reported as not free.
  bool is_free(int col, int row) const {
    return in_bounds(col, row) && cells_[index(col, row)] != 0;
  }
  bool is_free_at(Vec2 p) const;
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }
  int col_of(double x) const;
  int row_of(double y) const;
  Vec2 cell_center(int col, int row) const;
  std::size_t free_count() const;
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  /// Distance from `p` to the nearest blocked cell (or map edge), searched within `max_range`.
  /// Returns `max_range` when nothing is closer.
  double clearance(Vec2 p, double max_range) const;
  /// True when any blocked cell (or the outside of the map) lies strictly within `radius` of `p`.
  bool disc_hits_obstacle(Vec2 p, double radius) const;

  /// FNV-1a 64-bit digest of dimensions, resolution, origin and cells, as 16 hex digits.
  std::string digest() const;

 private:
  std::string name_;
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  Vec2 origin_;
  std::vector<std::uint8_t> cells_;
};

/// A pedestrian trajectory resampled onto the simulator tick grid.
struct PedestrianTrack {
  AgentId id = 0;
  double entry_time = 0.0;
  double exit_time = 0.0;
  /// Index of the first tick at which the pedestrian is present; positions[i] is at tick first_tick + i.
  std::int64_t first_tick = 0;
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
  std::vector<double> headings;

  std::int64_t last_tick() const {
    return first_tick + static_cast<std::int64_t>(positions.size()) - 1;
  }
  bool present_at(std::int64_t tick) const {
    return !positions.empty() && tick >= first_tick && tick <= last_tick();
  }
  /// Replayed state at `tick`; requires present_at(tick).
  AgentState state_at(std::int64_t tick, double radius) const;
};

/// Where a set of pedestrian tracks came from; kept so sampled episodes can be written back out.
struct TrackSection {
  std::string file;
  double frame_rate = 25.0;
  double t_start = 0.0;
  double t_end = 0.0;

  friend bool operator==(const TrackSection&, const TrackSection&) = default;
};

struct Episode {
  std::string name;
  std::string environment;
  Pose2D robot_start;
  Vec2 goal;
  double goal_radius = 0.3;
  double time_budget = 60.0;
  double tick_rate = 25.0;
  double pedestrian_radius = 0.3;
  std::vector<TrackSection> sections;
  std::vector<PedestrianTrack> tracks;

  double dt() const { return 1.0 / tick_rate; }
  /// Number of ticks after which the episode times out.
  std::int64_t budget_ticks() const;
};

double distance_to_goal(const AgentState& state, Vec2 goal);
/// Absolute angle in [0, pi] between the heading and the vector toward `goal`; 0 when at the goal.
double bearing_error(const Pose2D& pose, Vec2 goal);

}  // namespace socnav
