#include "socnav/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace socnav {

EnvironmentMap::EnvironmentMap(std::string name, int width, int height, double resolution,
                               Vec2 origin, std::vector<std::uint8_t> free_cells)
    : name_(std::move(name)),
      width_(width),
      height_(height),
      resolution_(resolution),
      origin_(origin),
      cells_(std::move(free_cells)) {
  if (width <= 0 || height <= 0) throw ParseError("environment grid must be non-empty");
  if (!(resolution > 0.0)) throw ParseError("environment resolution must be positive");
  if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ParseError("environment cell count does not match dimensions");
  }
  for (auto& c : cells_) c = c ? 1 : 0;
  if (free_count() == 0) throw ParseError("environment '" + name_ + "' has no traversable cells");
}

int EnvironmentMap::col_of(double x) const {
  return static_cast<int>(std::floor((x - origin_.x) / resolution_));
}

int EnvironmentMap::row_of(double y) const {
  return static_cast<int>(std::floor((y - origin_.y) / resolution_));
}

bool EnvironmentMap::is_free_at(Vec2 p) const { return is_free(col_of(p.x), row_of(p.y)); }

Vec2 EnvironmentMap::cell_center(int col, int row) const {
  return {origin_.x + (col + 0.5) * resolution_, origin_.y + (row + 0.5) * resolution_};
}

std::size_t EnvironmentMap::free_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

namespace {

double point_to_cell_distance(const EnvironmentMap& env, Vec2 p, int col, int row) {
  const double res = env.resolution();
  const double x0 = env.origin().x + col * res;
  const double y0 = env.origin().y + row * res;
  const double dx = std::max({x0 - p.x, 0.0, p.x - (x0 + res)});
  const double dy = std::max({y0 - p.y, 0.0, p.y - (y0 + res)});
  return std::hypot(dx, dy);
}

}  // namespace

double EnvironmentMap::clearance(Vec2 p, double max_range) const {
  const int c0 = col_of(p.x - max_range);
  const int c1 = col_of(p.x + max_range);
  const int r0 = row_of(p.y - max_range);
  const int r1 = row_of(p.y + max_range);
  double best = max_range;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (is_free(c, r)) continue;
      best = std::min(best, point_to_cell_distance(*this, p, c, r));
    }
  }
  return best;
}

bool EnvironmentMap::disc_hits_obstacle(Vec2 p, double radius) const {
  const int c0 = col_of(p.x - radius);
  const int c1 = col_of(p.x + radius);
  const int r0 = row_of(p.y - radius);
  const int r1 = row_of(p.y + radius);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (is_free(c, r)) continue;
      if (point_to_cell_distance(*this, p, c, r) < radius) return true;
    }
  }
  return false;
}

std::string EnvironmentMap::digest() const {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const std::int32_t dims[2] = {width_, height_};
  mix(dims, sizeof dims);
  const double geo[3] = {resolution_, origin_.x, origin_.y};
  mix(geo, sizeof geo);
  mix(cells_.data(), cells_.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

AgentState PedestrianTrack::state_at(std::int64_t tick, double radius) const {
  const auto i = static_cast<std::size_t>(tick - first_tick);
  AgentState s;
  s.id = id;
  s.pose = Pose2D(positions[i].x, positions[i].y, headings[i]);
  s.velocity = velocities[i];
  s.radius = radius;
  return s;
}

std::int64_t Episode::budget_ticks() const {
  return static_cast<std::int64_t>(std::llround(time_budget * tick_rate));
}

double distance_to_goal(const AgentState& state, Vec2 goal) {
  return distance(state.position(), goal);
}

double bearing_error(const Pose2D& pose, Vec2 goal) {
  const Vec2 to_goal = goal - pose.position();
  if (to_goal.x == 0.0 && to_goal.y == 0.0) return 0.0;
  return std::abs(normalize_angle(std::atan2(to_goal.y, to_goal.x) - pose.heading));
}

}  // namespace socnav
